//! Linear, stack-based genetic programming.
//!
//! A [`Program`] is a flat postfix instruction sequence run on a value stack.
//! The interpreter is total: every program evaluates to a finite number at
//! every point, so any genome produced by the variation operators can be
//! scored.

mod interp;
mod ops;

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

pub use interp::{interpret, interpret_traced, Trace, DIVISION_THRESHOLD};
pub use ops::{
    crossover_at, mutate, mutate_counted, random_instruction, random_program, two_point_crossover,
};

/// Upper bound on program length. Offspring longer than this are truncated.
pub const MAX_PROGRAM_LEN: usize = 200;

/// Bound of the fixed constant interval mixed in with the domain interval.
pub const OUTPUT_SCALE_CONST: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instruction {
    PushConst(f64),
    PushVar(usize),
    Add,
    Sub,
    Mul,
    /// Protected division: yields 1 when the divisor is below
    /// [`DIVISION_THRESHOLD`] in magnitude.
    Div,
    Dup,
    Swap,
}

impl Instruction {
    /// The six non-terminal opcodes.
    pub const OPERATORS: [Instruction; 6] = [
        Instruction::Add,
        Instruction::Sub,
        Instruction::Mul,
        Instruction::Div,
        Instruction::Dup,
        Instruction::Swap,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(self, Instruction::PushConst(_) | Instruction::PushVar(_))
    }

    fn parse_token(tok: &str, dimension: usize) -> Result<Self> {
        let ins = match tok {
            "+" => Instruction::Add,
            "-" => Instruction::Sub,
            "*" => Instruction::Mul,
            "/" => Instruction::Div,
            "DUP" => Instruction::Dup,
            "SWAP" => Instruction::Swap,
            _ => {
                if let Some(idx) = tok.strip_prefix('x') {
                    let d: usize = idx
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad variable token '{tok}'")))?;
                    if d >= dimension {
                        return Err(Error::Parse(format!(
                            "variable {tok} out of range for dimension {dimension}"
                        )));
                    }
                    Instruction::PushVar(d)
                } else {
                    let c: f64 = tok
                        .parse()
                        .map_err(|_| Error::Parse(format!("unknown token '{tok}'")))?;
                    if !c.is_finite() {
                        return Err(Error::Parse(format!("non-finite constant '{tok}'")));
                    }
                    Instruction::PushConst(c)
                }
            }
        };
        Ok(ins)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Debug formatting of f64 is the shortest string that parses back exactly.
            Instruction::PushConst(c) => write!(f, "{c:?}"),
            Instruction::PushVar(d) => write!(f, "x{d}"),
            Instruction::Add => f.write_str("+"),
            Instruction::Sub => f.write_str("-"),
            Instruction::Mul => f.write_str("*"),
            Instruction::Div => f.write_str("/"),
            Instruction::Dup => f.write_str("DUP"),
            Instruction::Swap => f.write_str("SWAP"),
        }
    }
}

/// Where random constants come from: one of up to two intervals, picked
/// with equal probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstRange {
    primary: (f64, f64),
    secondary: Option<(f64, f64)>,
}

impl ConstRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        check_interval(lo, hi)?;
        Ok(ConstRange {
            primary: (lo, hi),
            secondary: None,
        })
    }

    /// The search interval of a benchmark mixed 50/50 with `[-10, 10]`, so
    /// constants can match both coordinate scale and output scale.
    pub fn for_domain(lo: f64, hi: f64) -> Result<Self> {
        check_interval(lo, hi)?;
        Ok(ConstRange {
            primary: (lo, hi),
            secondary: Some((-OUTPUT_SCALE_CONST, OUTPUT_SCALE_CONST)),
        })
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> {
        std::iter::once(self.primary).chain(self.secondary)
    }

    pub fn contains(&self, c: f64) -> bool {
        self.intervals().any(|(lo, hi)| c >= lo && c <= hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = match self.secondary {
            Some(s) if rng.gen_bool(0.5) => s,
            _ => self.primary,
        };
        if lo == hi {
            lo
        } else {
            rng.gen_range(lo..=hi)
        }
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "bad constant interval [{lo}, {hi}]"
        )))
    }
}

/// A candidate surrogate `R^D -> R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    dimension: usize,
    code: Vec<Instruction>,
    const_range: ConstRange,
}

impl Program {
    pub fn new(dimension: usize, code: Vec<Instruction>, const_range: ConstRange) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("program dimension must be positive"));
        }
        if code.is_empty() || code.len() > MAX_PROGRAM_LEN {
            return Err(Error::invalid(format!(
                "program length {} outside 1..={MAX_PROGRAM_LEN}",
                code.len()
            )));
        }
        for ins in &code {
            match *ins {
                Instruction::PushVar(d) if d >= dimension => {
                    return Err(Error::invalid(format!(
                        "x{d} out of range for dimension {dimension}"
                    )))
                }
                Instruction::PushConst(c) if !c.is_finite() => {
                    return Err(Error::invalid("non-finite constant"))
                }
                _ => {}
            }
        }
        Ok(Program {
            dimension,
            code,
            const_range,
        })
    }

    /// Parses the space-separated postfix form produced by `Display`.
    pub fn parse(text: &str, dimension: usize, const_range: ConstRange) -> Result<Self> {
        let code = text
            .split_whitespace()
            .map(|t| Instruction::parse_token(t, dimension))
            .collect::<Result<Vec<_>>>()?;
        Program::new(dimension, code, const_range)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn code(&self) -> &[Instruction] {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn const_range(&self) -> ConstRange {
        self.const_range
    }

    /// Evaluates the program at `x`.
    ///
    /// # Panics
    /// If `x.len()` differs from the program dimension; use [`interpret`] for
    /// the checked variant.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dimension, "point dimension mismatch");
        interp::run(&self.code, x, &mut interp::NoTrace)
    }

    pub(crate) fn from_parts_unchecked(
        dimension: usize,
        code: Vec<Instruction>,
        const_range: ConstRange,
    ) -> Self {
        debug_assert!(!code.is_empty() && code.len() <= MAX_PROGRAM_LEN);
        Program {
            dimension,
            code,
            const_range,
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ins) in self.code.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{ins}")?;
        }
        Ok(())
    }
}
