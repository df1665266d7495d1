//! OpenQASM 2.0 subset reader and writer.
//!
//! Accepted statements: an optional `OPENQASM 2.0;` header and
//! `include "qelib1.inc";`, a single `qreg` and at most one `creg`, and the
//! gates `h x sx rz cx barrier measure`. Gate operands may be a single qubit
//! or, for one-qubit gates and `measure`, a whole register. `delay(n)` with an
//! integer nanosecond argument is accepted as an extension so that scheduled
//! idle periods survive a round trip.
//!
//! Angles are literal arithmetic over numbers and `pi` with `+ - * /` and
//! parentheses.

use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unsupported gate `{name}`")]
    UnsupportedGate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: index {index} out of bounds for register `{reg}` of size {size}")]
    RegisterBound { line: usize, col: usize, reg: String, index: usize, size: usize },
    #[error("invalid circuit: {0}")]
    Circuit(#[from] CircuitError),
    #[error("cannot emit gate `{0}` in the QASM subset")]
    Unemittable(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
    Arrow,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |i: &mut usize, col: &mut usize, n: usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(&mut i, &mut col, 1);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut col, 1);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut col, 1);
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, col: tc });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                advance(&mut i, &mut col, 1);
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    let n = j - i;
                    advance(&mut i, &mut col, n);
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| QasmError::Syntax {
                line: tl,
                col: tc,
                msg: format!("malformed number `{s}`"),
            })?;
            out.push(Token { tok: Tok::Num(v), line: tl, col: tc });
        } else if c == '"' {
            let start = i + 1;
            advance(&mut i, &mut col, 1);
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                advance(&mut i, &mut col, 1);
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(QasmError::Syntax { line: tl, col: tc, msg: "unterminated string".into() });
            }
            out.push(Token { tok: Tok::Str(chars[start..i].iter().collect()), line: tl, col: tc });
            advance(&mut i, &mut col, 1);
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token { tok: Tok::Arrow, line: tl, col: tc });
            advance(&mut i, &mut col, 2);
        } else if "[](),;+-*/=<>!{}".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line: tl, col: tc });
            advance(&mut i, &mut col, 1);
        } else {
            return Err(QasmError::Syntax { line: tl, col: tc, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Register {
    name: String,
    size: usize,
}

/// A qubit or clbit operand: one element, or the whole register.
enum Operand {
    Single(usize),
    Whole,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qreg: Option<Register>,
    creg: Option<Register>,
    gates: Vec<(GateKind, Vec<usize>)>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, msg: impl Into<String>) -> Result<T, QasmError> {
        Err(QasmError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            self.err(&t, format!("expected `{c}`"))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            _ => self.err(&t, "expected identifier"),
        }
    }

    fn expect_index(&mut self) -> Result<usize, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            _ => self.err(&t, "expected non-negative integer"),
        }
    }

    fn parse_program(&mut self) -> Result<(), QasmError> {
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Ok(()),
                Tok::Ident(word) => {
                    let word = word.clone();
                    self.next();
                    self.statement(&word, &t)?;
                }
                _ => return self.err(&t, "expected statement"),
            }
        }
    }

    fn statement(&mut self, word: &str, at: &Token) -> Result<(), QasmError> {
        match word {
            "OPENQASM" => {
                let v = self.next();
                match v.tok {
                    Tok::Num(x) if (x - 2.0).abs() < 1e-12 => {}
                    _ => return self.err(&v, "only OPENQASM 2.0 is supported"),
                }
                self.expect_sym(';')
            }
            "include" => {
                let s = self.next();
                if !matches!(s.tok, Tok::Str(_)) {
                    return self.err(&s, "expected file name string");
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => {
                let (name, _) = self.expect_ident()?;
                self.expect_sym('[')?;
                let size = self.expect_index()?;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                let slot = if word == "qreg" { &mut self.qreg } else { &mut self.creg };
                if slot.is_some() {
                    return self.err(at, format!("only one `{word}` declaration is supported"));
                }
                *slot = Some(Register { name, size });
                Ok(())
            }
            "h" | "x" | "sx" => {
                let kind = match word {
                    "h" => GateKind::H,
                    "x" => GateKind::X,
                    _ => GateKind::Sx,
                };
                self.one_qubit_gate(kind)
            }
            "rz" => {
                self.expect_sym('(')?;
                let theta = self.expr()?;
                self.expect_sym(')')?;
                self.one_qubit_gate(GateKind::Rz(theta))
            }
            "delay" => {
                self.expect_sym('(')?;
                let t = self.peek().clone();
                let d = self.expr()?;
                if d < 0.0 || d.fract() != 0.0 {
                    return self.err(&t, "delay must be a non-negative integer number of nanoseconds");
                }
                self.expect_sym(')')?;
                self.one_qubit_gate(GateKind::Delay(d as u64))
            }
            "cx" => {
                let a = self.qubit_single()?;
                self.expect_sym(',')?;
                let b = self.qubit_single()?;
                self.expect_sym(';')?;
                self.gates.push((GateKind::Cx, vec![a, b]));
                Ok(())
            }
            "barrier" => {
                // Any operand list synchronizes the whole register.
                loop {
                    self.qubit_operand()?;
                    let t = self.next();
                    match t.tok {
                        Tok::Sym(',') => continue,
                        Tok::Sym(';') => break,
                        _ => return self.err(&t, "expected `,` or `;`"),
                    }
                }
                self.gates.push((GateKind::Barrier, Vec::new()));
                Ok(())
            }
            "measure" => {
                let q = self.qubit_operand()?;
                let t = self.next();
                if t.tok != Tok::Arrow {
                    return self.err(&t, "expected `->`");
                }
                let c = self.clbit_operand()?;
                self.expect_sym(';')?;
                match (q, c) {
                    (Operand::Single(q), Operand::Single(c)) => self.gates.push((GateKind::Measure(c), vec![q])),
                    (Operand::Whole, Operand::Whole) => {
                        let nq = self.qreg.as_ref().map_or(0, |r| r.size);
                        let nc = self.creg.as_ref().map_or(0, |r| r.size);
                        if nq != nc {
                            return self.err(at, "register sizes differ in broadcast measure");
                        }
                        for i in 0..nq {
                            self.gates.push((GateKind::Measure(i), vec![i]));
                        }
                    }
                    _ => return self.err(at, "cannot mix register and element operands in measure"),
                }
                Ok(())
            }
            _ => Err(QasmError::UnsupportedGate { line: at.line, col: at.col, name: word.to_string() }),
        }
    }

    fn one_qubit_gate(&mut self, kind: GateKind) -> Result<(), QasmError> {
        let q = self.qubit_operand()?;
        self.expect_sym(';')?;
        match q {
            Operand::Single(q) => self.gates.push((kind, vec![q])),
            Operand::Whole => {
                let n = self.qreg.as_ref().map_or(0, |r| r.size);
                for i in 0..n {
                    self.gates.push((kind.clone(), vec![i]));
                }
            }
        }
        Ok(())
    }

    fn qubit_single(&mut self) -> Result<usize, QasmError> {
        let t = self.peek().clone();
        match self.qubit_operand()? {
            Operand::Single(q) => Ok(q),
            Operand::Whole => self.err(&t, "expected a single qubit"),
        }
    }

    fn qubit_operand(&mut self) -> Result<Operand, QasmError> {
        self.operand(true)
    }

    fn clbit_operand(&mut self) -> Result<Operand, QasmError> {
        self.operand(false)
    }

    fn operand(&mut self, quantum: bool) -> Result<Operand, QasmError> {
        let (name, t) = self.expect_ident()?;
        let reg = if quantum { &self.qreg } else { &self.creg };
        let (reg_name, size) = match reg {
            Some(r) if r.name == name => (r.name.clone(), r.size),
            _ => {
                let kind = if quantum { "quantum" } else { "classical" };
                return self.err(&t, format!("unknown {kind} register `{name}`"));
            }
        };
        if self.peek().tok != Tok::Sym('[') {
            return Ok(Operand::Whole);
        }
        self.next();
        let it = self.peek().clone();
        let index = self.expect_index()?;
        self.expect_sym(']')?;
        if index >= size {
            return Err(QasmError::RegisterBound { line: it.line, col: it.col, reg: reg_name, index, size });
        }
        Ok(Operand::Single(index))
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    v += self.term()?;
                }
                Tok::Sym('-') => {
                    self.next();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.next();
                    v *= self.unary()?;
                }
                Tok::Sym('/') => {
                    self.next();
                    v /= self.unary()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Sym('-') => Ok(-self.unary()?),
            Tok::Sym('+') => self.unary(),
            Tok::Num(v) => Ok(v),
            Tok::Ident(ref s) if s == "pi" => Ok(std::f64::consts::PI),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            _ => self.err(&t, "expected number, `pi` or `(`"),
        }
    }
}

/// Parses a program in the supported OpenQASM 2.0 subset.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, qreg: None, creg: None, gates: Vec::new() };
    p.parse_program()?;
    let nq = p.qreg.as_ref().map_or(0, |r| r.size);
    let nc = p.creg.as_ref().map_or(0, |r| r.size);
    let mut c = Circuit::new(nq, nc);
    for (kind, qubits) in p.gates {
        c.push(kind, qubits);
    }
    c.validate()?;
    Ok(c)
}

/// Writes the circuit in the same subset [`parse_qasm`] reads.
pub fn emit_qasm(c: &Circuit) -> Result<String, QasmError> {
    let mut s = String::new();
    s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", c.num_qubits);
    if c.num_clbits > 0 {
        let _ = writeln!(s, "creg c[{}];", c.num_clbits);
    }
    for g in &c.gates {
        let q = &g.qubits;
        let _ = match &g.kind {
            GateKind::Rz(t) => writeln!(s, "rz({t:?}) q[{}];", q[0]),
            GateKind::Sx => writeln!(s, "sx q[{}];", q[0]),
            GateKind::X => writeln!(s, "x q[{}];", q[0]),
            GateKind::H => writeln!(s, "h q[{}];", q[0]),
            GateKind::Cx => writeln!(s, "cx q[{}],q[{}];", q[0], q[1]),
            GateKind::Measure(cb) => writeln!(s, "measure q[{}] -> c[{cb}];", q[0]),
            GateKind::Barrier => writeln!(s, "barrier q;"),
            GateKind::Delay(d) => writeln!(s, "delay({d}) q[{}];", q[0]),
            GateKind::U2q(_) => return Err(QasmError::Unemittable("u2q")),
        };
    }
    Ok(s)
}
