use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surmod_core::stackgp::{
    crossover_at, interpret, interpret_traced, mutate_counted, random_program, two_point_crossover,
    ConstRange, Instruction, Program, MAX_PROGRAM_LEN,
};

/// Straightforward Vec-backed reimplementation used as an oracle.
fn reference_eval(code: &[Instruction], x: &[f64]) -> f64 {
    let fix = |v: f64| if v.is_finite() { v } else { 0.0 };
    let mut s: Vec<f64> = Vec::new();
    for ins in code {
        match *ins {
            Instruction::PushConst(c) => s.push(fix(c)),
            Instruction::PushVar(d) => s.push(fix(x[d])),
            Instruction::Dup => {
                if let Some(&t) = s.last() {
                    s.push(t);
                }
            }
            Instruction::Swap => {
                let n = s.len();
                if n >= 2 {
                    s.swap(n - 1, n - 2);
                }
            }
            op => {
                if s.len() < 2 {
                    continue;
                }
                let b = s.pop().unwrap();
                let a = s.pop().unwrap();
                let r = match op {
                    Instruction::Add => a + b,
                    Instruction::Sub => a - b,
                    Instruction::Mul => a * b,
                    Instruction::Div => {
                        if b.abs() < 1e-9 {
                            1.0
                        } else {
                            a / b
                        }
                    }
                    _ => unreachable!(),
                };
                s.push(fix(r));
            }
        }
    }
    s.last().copied().unwrap_or(0.0)
}

fn cr() -> ConstRange {
    ConstRange::for_domain(-5.12, 5.12).unwrap()
}

fn point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-5.12..=5.12)).collect()
}

fn assert_valid(p: &Program, dim: usize) {
    assert_eq!(p.dimension(), dim);
    assert!(!p.is_empty() && p.len() <= MAX_PROGRAM_LEN);
    for ins in p.code() {
        match *ins {
            Instruction::PushVar(d) => assert!(d < dim),
            Instruction::PushConst(c) => assert!(c.is_finite()),
            _ => {}
        }
    }
    assert!(Program::new(dim, p.code().to_vec(), p.const_range()).is_ok());
}

#[test]
fn fuzzed_programs_are_total_and_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nonfinite = 0;
    for i in 0..10_000 {
        let dim = 1 + i % 4;
        let p = random_program(dim, MAX_PROGRAM_LEN, cr(), &mut rng).unwrap();
        for _ in 0..10 {
            let x = point(&mut rng, dim);
            let v = interpret(&p, &x).unwrap();
            if !v.is_finite() {
                nonfinite += 1;
            }
            assert_eq!(v.to_bits(), reference_eval(p.code(), &x).to_bits(), "{p}");
            assert_eq!(v.to_bits(), p.eval(&x).to_bits());
        }
    }
    assert_eq!(nonfinite, 0);
}

#[test]
fn extreme_constants_stay_finite() {
    let r = ConstRange::new(-1.0, 1.0).unwrap();
    let p = Program::parse("1e308 DUP * DUP + x0 0.0 / * 1e-300 /", 1, r).unwrap();
    let v = interpret(&p, &[f64::MAX]).unwrap();
    assert!(v.is_finite());
    assert_eq!(v, reference_eval(p.code(), &[f64::MAX]));
}

#[test]
fn operators_are_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..10_000 {
        let dim = 1 + i % 4;
        let a = random_program(dim, 1 + rng.gen_range(1..MAX_PROGRAM_LEN), cr(), &mut rng).unwrap();
        let b = random_program(dim, 1 + rng.gen_range(1..MAX_PROGRAM_LEN), cr(), &mut rng).unwrap();
        let (c, d) = two_point_crossover(&a, &b, &mut rng).unwrap();
        assert_valid(&c, dim);
        assert_valid(&d, dim);
        let (m, _) = mutate_counted(&c, 0.2, cr(), &mut rng);
        assert_valid(&m, dim);
        assert_eq!(m.len(), c.len());
    }
}

#[test]
fn crossover_truncates_and_refills() {
    let r = cr();
    let long = Program::new(1, vec![Instruction::PushVar(0); MAX_PROGRAM_LEN], r).unwrap();
    let (c, d) = crossover_at(&long, &long, (150, 150), (0, 120)).unwrap();
    assert_eq!(c.len(), MAX_PROGRAM_LEN);
    assert_eq!(d.len(), 80);
    let short = Program::parse("x0 1.0", 1, r).unwrap();
    let (e, _) = crossover_at(&short, &short, (0, 2), (0, 0)).unwrap();
    assert_eq!(e, short);
}

#[test]
fn initial_lengths_are_uniform() {
    // 9 bins, 8 degrees of freedom; 26.12 is the 0.999 quantile.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0usize; 11];
    let n = 10_000;
    for _ in 0..n {
        counts[random_program(2, 10, cr(), &mut rng).unwrap().len()] += 1;
    }
    assert_eq!(counts[0] + counts[1], 0);
    let expected = n as f64 / 9.0;
    let chi2: f64 = counts[2..]
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    assert!(chi2 < 26.12, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn mutation_count_is_binomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = Program::new(2, vec![Instruction::Add; MAX_PROGRAM_LEN], cr()).unwrap();
    let mut total = 0;
    for _ in 0..50 {
        total += mutate_counted(&p, 0.2, cr(), &mut rng).1;
    }
    let (n, q) = (10_000.0f64, 0.2);
    let sigma = (n * q * (1.0 - q)).sqrt();
    assert!((total as f64 - n * q).abs() <= 3.0 * sigma, "{total}");
}

#[test]
fn programs_are_continuous_away_from_division_zeros() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (h1, h2) = (1e-6, 1e-9);
    let mut probed = 0;
    for _ in 0..200 {
        let p = random_program(2, 30, cr(), &mut rng).unwrap();
        for _ in 0..100 {
            let x = point(&mut rng, 2);
            let dir: Vec<f64> = point(&mut rng, 2);
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let at = |h: f64| -> Vec<f64> {
                x.iter().zip(&dir).map(|(a, u)| a + h * u / norm).collect()
            };
            let (f0, t0) = interpret_traced(&p, &x).unwrap();
            let (f1, t1) = interpret_traced(&p, &at(h1)).unwrap();
            let (f2, t2) = interpret_traced(&p, &at(h2)).unwrap();
            let near_zero = [t0, t1, t2]
                .iter()
                .any(|t| t.min_divisor < 1e-6 || t.overflowed);
            if near_zero {
                continue;
            }
            probed += 1;
            let noise = 1e-7 * (1.0 + t0.max_magnitude);
            let (d1, d2) = ((f1 - f0).abs(), (f2 - f0).abs());
            assert!(d2 <= 0.1 * d1 + noise, "{p} at {x:?}: d1={d1} d2={d2}");
        }
    }
    assert!(probed > 10_000);
}

fn arb_program() -> impl Strategy<Value = Program> {
    (1usize..4, any::<u64>()).prop_map(|(dim, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_program(dim, MAX_PROGRAM_LEN, cr(), &mut rng).unwrap()
    })
}

proptest! {
    #[test]
    fn interpretation_is_pure(p in arb_program(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = point(&mut rng, p.dimension());
        let a = interpret(&p, &x).unwrap();
        let b = interpret(&p, &x).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn text_round_trip_preserves_values(p in arb_program(), seed in any::<u64>()) {
        let q = Program::parse(&p.to_string(), p.dimension(), p.const_range()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = point(&mut rng, p.dimension());
        prop_assert_eq!(p.eval(&x).to_bits(), q.eval(&x).to_bits());
    }

    #[test]
    fn wrong_dimension_is_rejected(p in arb_program()) {
        let x = vec![0.0; p.dimension() + 1];
        prop_assert!(interpret(&p, &x).is_err());
    }
}
