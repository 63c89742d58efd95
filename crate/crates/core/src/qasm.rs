//! OpenQASM 2.0 subset: `qreg`/`creg` declarations, `cx`, `swap` and the
//! common single-qubit gates. Measurements and barriers are dropped.

use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Angle, Circuit, Gate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: unsupported construct `{construct}`")]
    Unsupported {
        line: usize,
        col: usize,
        construct: String,
    },
    #[error("{line}:{col}: {msg}")]
    Semantic {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("program declares no quantum register")]
    NoRegister,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DroppedStatement {
    pub line: usize,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedProgram {
    /// Quantum registers in declaration order; qubits are numbered
    /// consecutively across them.
    pub registers: Vec<(String, usize)>,
    pub circuit: Circuit,
    pub dropped: Vec<DroppedStatement>,
}

impl ParsedProgram {
    /// One line summarising dropped statements, if any.
    pub fn warning(&self) -> Option<String> {
        if self.dropped.is_empty() {
            return None;
        }
        let mut kinds: Vec<&str> = self.dropped.iter().map(|d| d.kind.as_str()).collect();
        kinds.sort_unstable();
        kinds.dedup();
        Some(format!(
            "dropped {} statement(s): {}",
            self.dropped.len(),
            kinds.join(", ")
        ))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    start: usize,
    end: usize,
}

const SYMBOLS: [&str; 14] = [
    "->", "==", ";", ",", "[", "]", "(", ")", "{", "}", "+", "-", "*", "/",
];

fn lex(src: &str) -> Result<Vec<Token>, QasmError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        let col = i - line_start + 1;
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else if c.is_ascii_digit()
            || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
        {
            let mut real = false;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                real = true;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let bad = || QasmError::Syntax {
                line,
                col,
                msg: format!("malformed number `{text}`"),
            };
            if real {
                Tok::Real(text.parse().map_err(|_| bad())?)
            } else {
                Tok::Int(text.parse().map_err(|_| bad())?)
            }
        } else if c == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != b'"' {
                return Err(QasmError::Syntax {
                    line,
                    col,
                    msg: "unterminated string".into(),
                });
            }
            i += 1;
            Tok::Str(src[start + 1..i - 1].to_string())
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            i += sym.len();
            Tok::Sym(sym)
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(QasmError::Syntax {
                line,
                col,
                msg: format!("unexpected character `{ch}`"),
            });
        };
        out.push(Token {
            tok,
            line,
            col,
            start,
            end: i,
        });
    }
    let col = bytes.len() - line_start + 1;
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
        start: bytes.len(),
        end: bytes.len(),
    });
    Ok(out)
}

/// Parameter count of each supported single-qubit gate.
fn single_qubit_arity(name: &str) -> Option<usize> {
    Some(match name {
        "h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg" | "id" => 0,
        "u1" | "rx" | "ry" | "rz" => 1,
        "u2" => 2,
        "u3" | "U" => 3,
        _ => return None,
    })
}

const THREE_QUBIT: [&str; 3] = ["ccx", "cswap", "rccx"];
const OTHER_TWO_QUBIT: [&str; 10] = [
    "cz", "cy", "ch", "crx", "cry", "crz", "cu1", "cu3", "rzz", "rxx",
];

enum Operand {
    One(u32),
    Register(u32, usize),
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    registers: Vec<(String, usize)>,
    offsets: Vec<u32>,
    cregs: Vec<String>,
    gates: Vec<Gate>,
    dropped: Vec<DroppedStatement>,
}

impl<'a> Parser<'a> {
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

    fn syntax<T>(&self, t: &Token, msg: impl Into<String>) -> Result<T, QasmError> {
        Err(QasmError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn semantic<T>(&self, t: &Token, msg: impl Into<String>) -> Result<T, QasmError> {
        Err(QasmError::Semantic {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<Token, QasmError> {
        let t = self.next();
        if t.tok == Tok::Sym(sym) {
            Ok(t)
        } else {
            self.syntax(&t, format!("expected `{sym}`, found {}", describe(&t.tok)))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => self.syntax(
                &t,
                format!("expected identifier, found {}", describe(other)),
            ),
        }
    }

    fn expect_int(&mut self) -> Result<u64, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(n),
            ref other => self.syntax(&t, format!("expected integer, found {}", describe(other))),
        }
    }

    fn program(&mut self) -> Result<(), QasmError> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
            self.next();
            let t = self.next();
            match t.tok {
                Tok::Real(2.0) | Tok::Int(2) => {}
                _ => return self.syntax(&t, "only OpenQASM 2.0 is supported"),
            }
            self.expect_sym(";")?;
        }
        while self.peek().tok != Tok::Eof {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let (word, t) = self.expect_ident()?;
        match word.as_str() {
            "include" => {
                let s = self.next();
                if !matches!(s.tok, Tok::Str(_)) {
                    return self.syntax(&s, "expected file name string");
                }
                self.expect_sym(";")?;
            }
            "qreg" => {
                let (name, nt) = self.expect_ident()?;
                self.expect_sym("[")?;
                let size = self.expect_int()? as usize;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                if self.registers.iter().any(|(n, _)| *n == name) || self.cregs.contains(&name) {
                    return self.semantic(&nt, format!("register `{name}` redeclared"));
                }
                if size == 0 {
                    return self.semantic(&nt, format!("register `{name}` has size 0"));
                }
                let offset = self.offsets.last().copied().unwrap_or(0)
                    + self.registers.last().map_or(0, |r| r.1 as u32);
                self.registers.push((name, size));
                self.offsets.push(offset);
            }
            "creg" => {
                let (name, _) = self.expect_ident()?;
                self.expect_sym("[")?;
                self.expect_int()?;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                self.cregs.push(name);
                self.drop_stmt(&t, "creg");
            }
            "measure" => {
                self.skip_to_semicolon()?;
                self.drop_stmt(&t, "measure");
            }
            "barrier" => {
                self.skip_to_semicolon()?;
                self.drop_stmt(&t, "barrier");
            }
            "if" | "gate" | "opaque" | "reset" => {
                return Err(QasmError::Unsupported {
                    line: t.line,
                    col: t.col,
                    construct: word,
                })
            }
            _ => self.application(word, &t)?,
        }
        Ok(())
    }

    fn drop_stmt(&mut self, t: &Token, kind: &str) {
        self.dropped.push(DroppedStatement {
            line: t.line,
            kind: kind.to_string(),
        });
    }

    fn skip_to_semicolon(&mut self) -> Result<(), QasmError> {
        loop {
            let t = self.next();
            match t.tok {
                Tok::Sym(";") => return Ok(()),
                Tok::Eof => return self.syntax(&t, "expected `;` before end of input"),
                _ => {}
            }
        }
    }

    fn application(&mut self, name: String, t: &Token) -> Result<(), QasmError> {
        let is_cx = name == "cx" || name == "CX";
        let is_swap = name == "swap";
        let arity = single_qubit_arity(&name);
        if !is_cx && !is_swap && arity.is_none() {
            if THREE_QUBIT.contains(&name.as_str()) || OTHER_TWO_QUBIT.contains(&name.as_str()) {
                return Err(QasmError::Unsupported {
                    line: t.line,
                    col: t.col,
                    construct: name,
                });
            }
            return self.semantic(t, format!("unknown gate `{name}`"));
        }
        let mut params = Vec::new();
        if self.peek().tok == Tok::Sym("(") {
            self.next();
            if self.peek().tok != Tok::Sym(")") {
                loop {
                    params.push(self.angle()?);
                    if self.peek().tok == Tok::Sym(",") {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
        }
        let expected = arity.unwrap_or(0);
        if params.len() != expected {
            return self.semantic(
                t,
                format!(
                    "`{name}` takes {expected} parameter(s), got {}",
                    params.len()
                ),
            );
        }
        let mut operands = vec![self.operand()?];
        while self.peek().tok == Tok::Sym(",") {
            self.next();
            operands.push(self.operand()?);
        }
        self.expect_sym(";")?;
        let want = if arity.is_some() { 1 } else { 2 };
        if operands.len() != want {
            return self.semantic(
                t,
                format!("`{name}` acts on {want} qubit(s), got {}", operands.len()),
            );
        }
        // Register arguments broadcast over equally sized registers.
        let width = operands
            .iter()
            .filter_map(|o| match o {
                Operand::Register(_, n) => Some(*n),
                Operand::One(_) => None,
            })
            .try_fold(None, |acc: Option<usize>, n| match acc {
                Some(m) if m != n => Err(()),
                _ => Ok(Some(n)),
            });
        let width = match width {
            Ok(w) => w,
            Err(()) => return self.semantic(t, "register arguments differ in size"),
        };
        let at = |o: &Operand, k: usize| match *o {
            Operand::One(q) => q,
            Operand::Register(base, _) => base + k as u32,
        };
        for k in 0..width.unwrap_or(1) {
            let gate = match (arity, is_swap) {
                (Some(_), _) => Gate::Single {
                    name: name.clone(),
                    params: params.clone(),
                    qubit: at(&operands[0], k),
                },
                (None, false) => Gate::cnot(at(&operands[0], k), at(&operands[1], k)),
                (None, true) => Gate::swap(at(&operands[0], k), at(&operands[1], k)),
            };
            if gate.is_two_qubit() {
                let q: Vec<u32> = gate.qubits().collect();
                if q[0] == q[1] {
                    return self.semantic(t, format!("`{name}` applied to the same qubit twice"));
                }
            }
            self.gates.push(gate);
        }
        Ok(())
    }

    fn operand(&mut self) -> Result<Operand, QasmError> {
        let (name, t) = self.expect_ident()?;
        let Some(r) = self.registers.iter().position(|(n, _)| *n == name) else {
            return self.semantic(&t, format!("unknown quantum register `{name}`"));
        };
        let (base, size) = (self.offsets[r], self.registers[r].1);
        if self.peek().tok != Tok::Sym("[") {
            return Ok(Operand::Register(base, size));
        }
        self.next();
        let idx = self.expect_int()? as usize;
        self.expect_sym("]")?;
        if idx >= size {
            return self.semantic(&t, format!("index {idx} out of range for `{name}[{size}]`"));
        }
        Ok(Operand::One(base + idx as u32))
    }

    fn angle(&mut self) -> Result<Angle, QasmError> {
        let start = self.peek().start;
        let value = self.expr()?;
        let end = self.toks[self.pos - 1].end;
        let text: String = self.src[start..end].split_whitespace().collect();
        Ok(Angle::new(text, value))
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym("+") => {
                    self.next();
                    v += self.term()?;
                }
                Tok::Sym("-") => {
                    self.next();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Sym("*") => {
                    self.next();
                    v *= self.factor()?;
                }
                Tok::Sym("/") => {
                    self.next();
                    v /= self.factor()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Sym("-") => Ok(-self.factor()?),
            Tok::Sym("+") => self.factor(),
            Tok::Sym("(") => {
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tok::Int(n) => Ok(n as f64),
            Tok::Real(x) => Ok(x),
            Tok::Ident(ref s) if s == "pi" => Ok(std::f64::consts::PI),
            ref other => self.syntax(
                &t,
                format!("expected expression, found {}", describe(other)),
            ),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Real(x) => format!("`{x}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

pub fn parse_qasm(src: &str) -> Result<ParsedProgram, QasmError> {
    let mut p = Parser {
        src,
        toks: lex(src)?,
        pos: 0,
        registers: Vec::new(),
        offsets: Vec::new(),
        cregs: Vec::new(),
        gates: Vec::new(),
        dropped: Vec::new(),
    };
    p.program()?;
    let total: usize = p.registers.iter().map(|r| r.1).sum();
    if total == 0 {
        return Err(QasmError::NoRegister);
    }
    let circuit = Circuit::from_gates(total, p.gates).expect("operands were range-checked");
    Ok(ParsedProgram {
        registers: p.registers,
        circuit,
        dropped: p.dropped,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmitOptions {
    /// Write each SWAP as three `cx` lines.
    pub decompose_swaps: bool,
}

pub fn emit_qasm(c: &Circuit, opts: EmitOptions) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", c.qubit_count());
    for g in c.gates() {
        match g {
            Gate::Cnot { control, target } => {
                let _ = writeln!(out, "cx q[{control}],q[{target}];");
            }
            Gate::Swap { a, b } if opts.decompose_swaps => {
                let _ = writeln!(
                    out,
                    "cx q[{a}],q[{b}];\ncx q[{b}],q[{a}];\ncx q[{a}],q[{b}];"
                );
            }
            Gate::Swap { a, b } => {
                let _ = writeln!(out, "swap q[{a}],q[{b}];");
            }
            Gate::Single {
                name,
                params,
                qubit,
            } => {
                out.push_str(name);
                if !params.is_empty() {
                    let texts: Vec<&str> = params.iter().map(|a| a.text.as_str()).collect();
                    let _ = write!(out, "({})", texts.join(","));
                }
                let _ = writeln!(out, " q[{qubit}];");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse_qasm("qreg q[2]; cx q[0],q[1];").unwrap();
        assert_eq!(p.circuit.gates(), &[Gate::cnot(0, 1)]);
        assert!(p.warning().is_none());
    }

    #[test]
    fn measure_is_dropped_with_warning() {
        let p = parse_qasm(
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\ncx q[0],q[1];\nmeasure q[0] -> c[0];\n",
        )
        .unwrap();
        assert_eq!(p.circuit.cnot_count(), 1);
        let measures = p.dropped.iter().filter(|d| d.kind == "measure").count();
        assert_eq!(measures, 1);
        assert_eq!(
            p.dropped.iter().find(|d| d.kind == "measure").unwrap().line,
            6
        );
        assert!(p.warning().unwrap().contains("measure"));
    }

    #[test]
    fn angles_keep_text_and_value() {
        let p = parse_qasm("qreg q[1]; u3(pi/2, -pi / 4, 2*(1+0.5)) q[0];").unwrap();
        let Gate::Single { params, .. } = &p.circuit.gates()[0] else {
            panic!("expected a single-qubit gate")
        };
        assert_eq!(params[0].text, "pi/2");
        assert_eq!(params[1].text, "-pi/4");
        assert!((params[0].value - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((params[1].value + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(params[2].value, 3.0);
    }

    #[test]
    fn registers_are_flattened() {
        let p = parse_qasm("qreg a[2]; qreg b[3]; cx a[1],b[2]; h b;").unwrap();
        assert_eq!(p.circuit.qubit_count(), 5);
        assert_eq!(p.circuit.gates()[0], Gate::cnot(1, 4));
        assert_eq!(p.circuit.len(), 4);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_qasm("qreg q[3];\nccx q[0],q[1],q[2];"),
            Err(QasmError::Unsupported {
                line: 2,
                col: 1,
                construct: "ccx".into()
            })
        );
        assert!(matches!(
            parse_qasm("qreg q[2];\nif (c==1) x q[0];"),
            Err(QasmError::Unsupported { line: 2, .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2];\ncx q[0] q[1];"),
            Err(QasmError::Syntax {
                line: 2,
                col: 9,
                ..
            })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2]; cx q[0],q[2];"),
            Err(QasmError::Semantic { .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2]; u1 q[0];"),
            Err(QasmError::Semantic { .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2]; foo q[0];"),
            Err(QasmError::Semantic { .. })
        ));
        assert_eq!(parse_qasm("OPENQASM 2.0;"), Err(QasmError::NoRegister));
    }

    #[test]
    fn emit_round_trip() {
        let c = Circuit::from_gates(
            3,
            [
                Gate::cnot(0, 2),
                Gate::swap(1, 2),
                Gate::Single {
                    name: "rz".into(),
                    params: vec![Angle::new("-pi/8", -std::f64::consts::PI / 8.0)],
                    qubit: 1,
                },
            ],
        )
        .unwrap();
        let text = emit_qasm(&c, EmitOptions::default());
        assert_eq!(parse_qasm(&text).unwrap().circuit, c);
    }

    #[test]
    fn swap_decomposition_on_emit() {
        let c = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap();
        let text = emit_qasm(
            &c,
            EmitOptions {
                decompose_swaps: true,
            },
        );
        assert_eq!(text.matches("cx ").count(), 3);
        assert_eq!(parse_qasm(&text).unwrap().circuit.cnot_count(), 3);
    }

    #[test]
    fn empty_circuit_emits_header_only() {
        let c = Circuit::new(4).unwrap();
        assert_eq!(
            emit_qasm(&c, EmitOptions::default()),
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[4];\n"
        );
    }
}
