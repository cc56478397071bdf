use super::{Instruction, Program, MAX_PROGRAM_LEN};
use crate::error::{Error, Result};

/// Divisors smaller than this in magnitude make `/` return 1.
pub const DIVISION_THRESHOLD: f64 = 1e-9;

/// Diagnostics collected while interpreting a program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace {
    /// Smallest divisor magnitude seen by an executed `/`, or `inf` if none ran.
    pub min_divisor: f64,
    /// Whether some intermediate overflowed and was reset to 0.
    pub overflowed: bool,
    /// Largest intermediate magnitude pushed.
    pub max_magnitude: f64,
}

pub(super) trait Observer {
    fn divisor(&mut self, b: f64);
    fn pushed(&mut self, v: f64);
    fn overflow(&mut self);
}

pub(super) struct NoTrace;

impl Observer for NoTrace {
    #[inline(always)]
    fn divisor(&mut self, _: f64) {}
    #[inline(always)]
    fn pushed(&mut self, _: f64) {}
    #[inline(always)]
    fn overflow(&mut self) {}
}

impl Observer for Trace {
    fn divisor(&mut self, b: f64) {
        self.min_divisor = self.min_divisor.min(b.abs());
    }
    fn pushed(&mut self, v: f64) {
        self.max_magnitude = self.max_magnitude.max(v.abs());
    }
    fn overflow(&mut self) {
        self.overflowed = true;
    }
}

#[inline(always)]
fn finite_or_zero<O: Observer>(v: f64, obs: &mut O) -> f64 {
    if v.is_finite() {
        v
    } else {
        obs.overflow();
        0.0
    }
}

/// Core loop. Operators that need more operands than the stack holds are
/// skipped; an empty final stack yields 0.
pub(super) fn run<O: Observer>(code: &[Instruction], x: &[f64], obs: &mut O) -> f64 {
    // Every instruction pushes at most one value, so depth never exceeds length.
    let mut stack = [0.0f64; MAX_PROGRAM_LEN];
    let mut top = 0usize;
    for ins in code {
        match *ins {
            Instruction::PushConst(c) => {
                stack[top] = c;
                top += 1;
            }
            Instruction::PushVar(d) => {
                stack[top] = finite_or_zero(x[d], obs);
                top += 1;
            }
            Instruction::Dup => {
                if top >= 1 {
                    stack[top] = stack[top - 1];
                    top += 1;
                }
            }
            Instruction::Swap => {
                if top >= 2 {
                    stack.swap(top - 1, top - 2);
                }
            }
            Instruction::Add | Instruction::Sub | Instruction::Mul | Instruction::Div => {
                if top < 2 {
                    continue;
                }
                let b = stack[top - 1];
                let a = stack[top - 2];
                let r = match *ins {
                    Instruction::Add => a + b,
                    Instruction::Sub => a - b,
                    Instruction::Mul => a * b,
                    _ => {
                        obs.divisor(b);
                        if b.abs() < DIVISION_THRESHOLD {
                            1.0
                        } else {
                            a / b
                        }
                    }
                };
                top -= 1;
                stack[top - 1] = finite_or_zero(r, obs);
            }
        }
        if top > 0 {
            obs.pushed(stack[top - 1]);
        }
    }
    if top == 0 {
        0.0
    } else {
        stack[top - 1]
    }
}

fn check_dimension(p: &Program, x: &[f64]) -> Result<()> {
    if x.len() != p.dimension() {
        return Err(Error::invalid(format!(
            "program has dimension {}, point has {}",
            p.dimension(),
            x.len()
        )));
    }
    Ok(())
}

/// Evaluates `p` at `x`. The result is always finite.
pub fn interpret(p: &Program, x: &[f64]) -> Result<f64> {
    check_dimension(p, x)?;
    Ok(run(p.code(), x, &mut NoTrace))
}

/// Like [`interpret`], also reporting divisor and overflow diagnostics.
pub fn interpret_traced(p: &Program, x: &[f64]) -> Result<(f64, Trace)> {
    check_dimension(p, x)?;
    let mut trace = Trace {
        min_divisor: f64::INFINITY,
        overflowed: false,
        max_magnitude: 0.0,
    };
    let v = run(p.code(), x, &mut trace);
    Ok((v, trace))
}
