//! Verilog-2001 and Xilinx UCF text generation.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dsl::{is_identifier, write_expr, ExprSyntax};
use crate::fsm::FsmSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("invalid Verilog identifiers: {}", .0.join(", "))]
    InvalidIdentifiers(Vec<String>),
    #[error("machine has {0} validation finding(s); refusing to emit")]
    Unvalidated(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PinMapError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("signal `{0}` mapped more than once")]
    Duplicate(String),
    #[error("signal `{0}` is not declared by the machine")]
    UnknownSignal(String),
    #[error("signal `{signal}` is mapped as {mapped} but the machine declares it as {declared}")]
    KindMismatch {
        signal: String,
        mapped: PinKind,
        declared: PinKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PinKind {
    Input,
    Output,
}

impl fmt::Display for PinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PinKind::Input => "input",
            PinKind::Output => "output",
        })
    }
}

impl FromStr for PinKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "input" => Ok(PinKind::Input),
            "output" => Ok(PinKind::Output),
            _ => Err(format!("`{}` is neither `input` nor `output`", s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinAssignment {
    pub signal: String,
    pub location: String,
    pub kind: PinKind,
}

/// Ordered signal-to-package-pin assignments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PinMap {
    entries: Vec<PinAssignment>,
}

impl PinMap {
    pub fn new<I, S, L>(entries: I) -> Result<Self, PinMapError>
    where
        I: IntoIterator<Item = (S, L, PinKind)>,
        S: Into<String>,
        L: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (signal, location, kind) in entries {
            let signal = signal.into();
            if !seen.insert(signal.clone()) {
                return Err(PinMapError::Duplicate(signal));
            }
            out.push(PinAssignment {
                signal,
                location: location.into(),
                kind,
            });
        }
        Ok(PinMap { entries: out })
    }

    pub fn entries(&self) -> &[PinAssignment] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks that every mapped signal exists in `spec` with a matching
    /// direction. Pulse outputs count as outputs.
    pub fn check_against(&self, spec: &FsmSpec) -> Result<(), PinMapError> {
        for e in &self.entries {
            let declared = if spec.inputs.contains(&e.signal) {
                PinKind::Input
            } else if spec.moore_outputs.contains(&e.signal) || spec.pulse_outputs.contains(&e.signal) {
                PinKind::Output
            } else {
                return Err(PinMapError::UnknownSignal(e.signal.clone()));
            };
            if declared != e.kind {
                return Err(PinMapError::KindMismatch {
                    signal: e.signal.clone(),
                    mapped: e.kind,
                    declared,
                });
            }
        }
        Ok(())
    }
}

/// Parses pin files: one `<signal> <pin> <input|output>` per line, `#`
/// comments.
pub fn parse_pins(text: &str) -> Result<PinMap, PinMapError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| PinMapError::Syntax {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [signal, pin, kind] = fields[..] else {
            return Err(syntax(format!(
                "expected `<signal> <pin> <input|output>`, found {} field(s)",
                fields.len()
            )));
        };
        let kind = kind.parse::<PinKind>().map_err(syntax)?;
        entries.push((signal.to_string(), pin.to_string(), kind));
    }
    PinMap::new(entries)
}

pub fn emit_ucf(pins: &PinMap) -> String {
    pins.entries
        .iter()
        .map(|e| format!("NET \"{}\" LOC = \"{}\";\n", e.signal, e.location))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StateEncoding {
    #[default]
    Binary,
    OneHot,
}

impl FromStr for StateEncoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(StateEncoding::Binary),
            "onehot" | "one-hot" => Ok(StateEncoding::OneHot),
            _ => Err(format!("unknown state encoding `{}`", s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    pub state_encoding: StateEncoding,
    pub module_name: String,
}

impl EmitOptions {
    pub fn for_spec(spec: &FsmSpec) -> Self {
        EmitOptions {
            state_encoding: StateEncoding::Binary,
            module_name: spec.name.clone(),
        }
    }

    pub fn encoding(mut self, e: StateEncoding) -> Self {
        self.state_encoding = e;
        self
    }
}

const VERILOG_KEYWORDS: &[&str] = &[
    "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex",
    "casez", "cell", "cmos", "config", "deassign", "default", "defparam", "design", "disable",
    "edge", "else", "end", "endcase", "endconfig", "endfunction", "endgenerate", "endmodule",
    "endprimitive", "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
    "fork", "function", "generate", "genvar", "highz0", "highz1", "if", "ifnone", "incdir",
    "include", "initial", "inout", "input", "instance", "integer", "join", "large", "liblist",
    "library", "localparam", "macromodule", "medium", "module", "nand", "negedge", "nmos", "nor",
    "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter", "pmos", "posedge",
    "primitive", "pull0", "pull1", "pulldown", "pullup", "pulsestyle_ondetect",
    "pulsestyle_onevent", "rcmos", "real", "realtime", "reg", "release", "repeat", "rnmos",
    "rpmos", "rtran", "rtranif0", "rtranif1", "scalared", "showcancelled", "signed", "small",
    "specify", "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task", "time",
    "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned",
    "use", "uwire", "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor",
    "xor",
];

/// Names the generated module declares itself.
const RESERVED: &[&str] = &["clk", "state", "next_state"];

fn check_identifiers(spec: &FsmSpec, opts: &EmitOptions) -> Result<(), EmitError> {
    let mut offenders = Vec::new();
    let mut taken: HashSet<&str> = RESERVED.iter().copied().collect();
    let names = std::iter::once(opts.module_name.as_str())
        .chain(spec.inputs.iter().map(String::as_str))
        .chain(spec.moore_outputs.iter().map(String::as_str))
        .chain(spec.pulse_outputs.iter().map(String::as_str))
        .chain(spec.state_names());
    for (i, name) in names.enumerate() {
        let bad_syntax = !is_identifier(name) || VERILOG_KEYWORDS.contains(&name);
        // The module name lives in its own namespace.
        let clash = i > 0 && !taken.insert(name);
        if bad_syntax || clash {
            offenders.push(name.to_string());
        }
    }
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(EmitError::InvalidIdentifiers(offenders))
    }
}

const VERILOG_SYNTAX: ExprSyntax = ExprSyntax {
    not: "!",
    and: " && ",
    or: " || ",
    zero: "1'b0",
    one: "1'b1",
};

fn binary_width(n: usize) -> usize {
    let mut w = 1;
    while (1usize << w) < n {
        w += 1;
    }
    w
}

/// Generates a synthesizable Verilog-2001 module for a validated machine.
///
/// Ports are `clk`, then inputs, Moore outputs and pulse outputs in
/// declaration order. The state register resets synchronously to the initial
/// state; the combinational block also holds pulses low during reset so the
/// module behaves like the simulator.
pub fn emit_verilog(spec: &FsmSpec, opts: &EmitOptions) -> Result<String, EmitError> {
    let report = spec.validate();
    if !report.is_clean() {
        return Err(EmitError::Unvalidated(report.findings.len()));
    }
    check_identifiers(spec, opts)?;

    let n = spec.states.len();
    let width = match opts.state_encoding {
        StateEncoding::Binary => binary_width(n),
        StateEncoding::OneHot => n,
    };
    let constant = |i: usize| match opts.state_encoding {
        StateEncoding::Binary => format!("{}'d{}", width, i),
        StateEncoding::OneHot => {
            let bits: String = (0..n).rev().map(|b| if b == i { '1' } else { '0' }).collect();
            format!("{}'b{}", width, bits)
        }
    };
    let range = if width > 1 {
        format!("[{}:0] ", width - 1)
    } else {
        String::new()
    };

    let mut v = String::new();
    let mut line = |s: &str| {
        v.push_str(s);
        v.push('\n');
    };

    line(&format!(
        "// Generated from machine `{}` ({} encoding). Do not edit.",
        spec.name,
        match opts.state_encoding {
            StateEncoding::Binary => "binary",
            StateEncoding::OneHot => "one-hot",
        }
    ));
    line(&format!("module {} (", opts.module_name));
    let mut ports = vec!["    input  wire clk".to_string()];
    ports.extend(spec.inputs.iter().map(|i| format!("    input  wire {}", i)));
    ports.extend(spec.moore_outputs.iter().map(|o| format!("    output wire {}", o)));
    ports.extend(spec.pulse_outputs.iter().map(|p| format!("    output reg  {}", p)));
    let last = ports.len() - 1;
    for (i, p) in ports.iter().enumerate() {
        line(&format!("{}{}", p, if i == last { "" } else { "," }));
    }
    line(");");
    line("");

    for (i, s) in spec.states.iter().enumerate() {
        line(&format!("    localparam {}{} = {};", range, s.name, constant(i)));
    }
    line("");
    line(&format!("    reg {}state;", range));
    line(&format!("    reg {}next_state;", range));
    line("");

    line("    always @(posedge clk) begin");
    match &spec.reset_input {
        Some(r) => {
            line(&format!("        if ({})", r));
            line(&format!("            state <= {};", spec.initial_state));
            line("        else");
            line("            state <= next_state;");
        }
        None => line("        state <= next_state;"),
    }
    line("    end");
    if spec.reset_input.is_none() {
        line("");
        line(&format!("    initial state = {};", spec.initial_state));
    }
    line("");

    line("    always @(*) begin");
    line("        next_state = state;");
    for p in &spec.pulse_outputs {
        line(&format!("        {} = 1'b0;", p));
    }
    let indent = if let Some(r) = &spec.reset_input {
        line(&format!("        if ({}) begin", r));
        line(&format!("            next_state = {};", spec.initial_state));
        line("        end else begin");
        "            "
    } else {
        "        "
    };
    line(&format!("{}case (state)", indent));
    for s in &spec.states {
        line(&format!("{}    {}: begin", indent, s.name));
        for (k, t) in s.transitions.iter().enumerate() {
            let mut cond = String::new();
            write_expr(&t.guard, &VERILOG_SYNTAX, &mut cond);
            let kw = if k == 0 { "if" } else { "end else if" };
            line(&format!("{}        {} ({}) begin", indent, kw, cond));
            line(&format!("{}            next_state = {};", indent, t.destination));
            for p in spec.pulse_outputs.iter().filter(|p| t.pulses.contains(*p)) {
                line(&format!("{}            {} = 1'b1;", indent, p));
            }
        }
        if !s.transitions.is_empty() {
            line(&format!("{}        end", indent));
        }
        line(&format!("{}    end", indent));
    }
    line(&format!("{}    default: begin", indent));
    line(&format!("{}        next_state = {};", indent, spec.initial_state));
    line(&format!("{}    end", indent));
    line(&format!("{}endcase", indent));
    if spec.reset_input.is_some() {
        line("        end");
    }
    line("    end");
    line("");

    for o in &spec.moore_outputs {
        let on: Vec<String> = spec
            .states
            .iter()
            .filter(|s| s.moore_assignments.get(o).copied().unwrap_or(false))
            .map(|s| format!("(state == {})", s.name))
            .collect();
        let rhs = if on.is_empty() {
            "1'b0".to_string()
        } else {
            on.join(" || ")
        };
        line(&format!("    assign {} = {};", o, rhs));
    }
    line("");
    line("endmodule");
    Ok(v)
}
