use rand::Rng;

use super::{ConstRange, Instruction, Program, MAX_PROGRAM_LEN};
use crate::error::{Error, Result};

/// One random slot: a terminal with probability 1/2 (constant or variable,
/// equally likely), otherwise one of the six operators.
pub fn random_instruction<R: Rng + ?Sized>(
    dimension: usize,
    const_range: ConstRange,
    rng: &mut R,
) -> Instruction {
    if rng.gen_bool(0.5) {
        if rng.gen_bool(0.5) {
            Instruction::PushConst(const_range.sample(rng))
        } else {
            Instruction::PushVar(rng.gen_range(0..dimension))
        }
    } else {
        Instruction::OPERATORS[rng.gen_range(0..Instruction::OPERATORS.len())]
    }
}

/// Linear-genome take on ramped half-and-half: the length is uniform over
/// `2..=max_length` and each slot is terminal or operator with equal odds.
pub fn random_program<R: Rng + ?Sized>(
    dimension: usize,
    max_length: usize,
    const_range: ConstRange,
    rng: &mut R,
) -> Result<Program> {
    if dimension == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if !(2..=MAX_PROGRAM_LEN).contains(&max_length) {
        return Err(Error::invalid(format!(
            "max_length {max_length} outside 2..={MAX_PROGRAM_LEN}"
        )));
    }
    let len = rng.gen_range(2..=max_length);
    let code = (0..len)
        .map(|_| random_instruction(dimension, const_range, rng))
        .collect();
    Ok(Program::from_parts_unchecked(dimension, code, const_range))
}

fn cut_points<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(0..=len);
    let j = rng.gen_range(0..=len);
    (i.min(j), i.max(j))
}

/// Two-point crossover with independently drawn cut points in each parent.
pub fn two_point_crossover<R: Rng + ?Sized>(
    a: &Program,
    b: &Program,
    rng: &mut R,
) -> Result<(Program, Program)> {
    if a.dimension() != b.dimension() {
        return Err(Error::invalid("crossover parents differ in dimension"));
    }
    let cuts_a = cut_points(a.len(), rng);
    let cuts_b = cut_points(b.len(), rng);
    crossover_at(a, b, cuts_a, cuts_b)
}

/// Exchanges `a[ia..ja)` with `b[ib..jb)`. Offspring are truncated to
/// [`MAX_PROGRAM_LEN`]; an empty offspring becomes a copy of its own parent.
pub fn crossover_at(
    a: &Program,
    b: &Program,
    (ia, ja): (usize, usize),
    (ib, jb): (usize, usize),
) -> Result<(Program, Program)> {
    if a.dimension() != b.dimension() {
        return Err(Error::invalid("crossover parents differ in dimension"));
    }
    if ia > ja || ja > a.len() || ib > jb || jb > b.len() {
        return Err(Error::invalid(format!(
            "bad cut points ({ia},{ja}) / ({ib},{jb}) for lengths {} / {}",
            a.len(),
            b.len()
        )));
    }
    let (ca, cb) = (a.code(), b.code());
    let splice =
        |head: &[Instruction], mid: &[Instruction], tail: &[Instruction], parent: &Program| {
            let mut code: Vec<Instruction> = head.iter().chain(mid).chain(tail).copied().collect();
            code.truncate(MAX_PROGRAM_LEN);
            if code.is_empty() {
                parent.clone()
            } else {
                Program::from_parts_unchecked(parent.dimension(), code, parent.const_range())
            }
        };
    let child_a = splice(&ca[..ia], &cb[ib..jb], &ca[ja..], a);
    let child_b = splice(&cb[..ib], &ca[ia..ja], &cb[jb..], b);
    Ok((child_a, child_b))
}

/// Replaces each instruction independently with probability `p_m`.
///
/// # Panics
/// If `p_m` is not a probability.
pub fn mutate<R: Rng + ?Sized>(
    p: &Program,
    p_m: f64,
    const_range: ConstRange,
    rng: &mut R,
) -> Program {
    mutate_counted(p, p_m, const_range, rng).0
}

/// [`mutate`], also returning how many slots were redrawn.
pub fn mutate_counted<R: Rng + ?Sized>(
    p: &Program,
    p_m: f64,
    const_range: ConstRange,
    rng: &mut R,
) -> (Program, usize) {
    assert!(
        (0.0..=1.0).contains(&p_m),
        "mutation rate {p_m} is not a probability"
    );
    let mut replaced = 0;
    let code = p
        .code()
        .iter()
        .map(|&ins| {
            if rng.gen_bool(p_m) {
                replaced += 1;
                random_instruction(p.dimension(), const_range, rng)
            } else {
                ins
            }
        })
        .collect();
    (
        Program::from_parts_unchecked(p.dimension(), code, p.const_range()),
        replaced,
    )
}
