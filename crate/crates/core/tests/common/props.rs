//! Randomised invariants, shared by the property tests and the acceptance
//! binary. Every runner is seeded, so a failure reproduces exactly.

use momenta::exactalg::{vars, Mono, Poly, RatFunc, Vars};
use momenta::hankel::{build_hankel, HankelMatrix};
use momenta::reduce::{solve_moments, MomentTable};
use momenta::scan::{cell_verdict, fit_exponent, whole, Cell, FitOptions};
use momenta::sde::{generate_system, SdeEquation};
use momenta::series::SeriesEngine;
use momenta::{BigRational, ModelSpec, Word};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

/// Cases per property; six properties give 1200 cases in total.
pub const CASES: u32 = 200;

fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<usize, String> {
    runner()
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))?;
    Ok(CASES as usize)
}

fn rational(num: std::ops::RangeInclusive<i64>, den: i64) -> impl Strategy<Value = BigRational> {
    num.prop_map(move |n| BigRational::new(n.into(), den.into()))
}

fn word(m: u8, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..m, 1..=max_len).prop_map(Word::from_letters)
}

struct Quartic {
    small: HankelMatrix,
    large: HankelMatrix,
}

fn quartic() -> Quartic {
    let model = ModelSpec::preset("quartic").unwrap();
    let table = solve_moments(&model, 10).unwrap();
    Quartic {
        small: build_hankel(&model, &table, 5).unwrap(),
        large: build_hankel(&model, &table, 6).unwrap(),
    }
}

/// Feasibility at size `n + 1` implies feasibility at size `n`.
pub fn psd_nesting() -> Result<usize, String> {
    let q = quartic();
    run("PSD nesting", (rational(-100..=1000, 1000), rational(0..=2000, 1000)), |(g, m2)| {
        let pt = [g, m2];
        if cell_verdict(&q.large, &whole(6), &pt) == Cell::Feasible {
            prop_assert_eq!(cell_verdict(&q.small, &whole(5), &pt), Cell::Feasible);
        }
        Ok(())
    })
}

/// The evaluated Hankel matrix is symmetric.
pub fn hankel_symmetry() -> Result<usize, String> {
    let model = ModelSpec::preset("ggg").unwrap();
    let table = solve_moments(&model, 6).unwrap();
    let h = build_hankel(&model, &table, 7).unwrap();
    run("Hankel symmetry", (rational(-60..=1000, 1000), rational(1..=2000, 1000)), |(g, m2)| {
        if g == BigRational::from_integer(0.into()) {
            return Ok(());
        }
        let Ok(m) = h.eval(&[g, m2]) else { return Ok(()) };
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                prop_assert_eq!(x, &m[j][i]);
            }
        }
        Ok(())
    })
}

/// Every loop equation vanishes identically on the solved table, and on
/// the series expansion.
pub fn sde_residual_zero() -> Result<usize, String> {
    let model = ModelSpec::preset("ggg").unwrap();
    let table: MomentTable = solve_moments(&model, 8).unwrap();
    let eqs: Vec<SdeEquation> = generate_system(&model, 4, true);
    let mut engine = SeriesEngine::new(&model, SeriesEngine::default_max_len(&model, 8, 3));
    let engine = std::cell::RefCell::new(&mut engine);
    run("SDE residual", 0..eqs.len(), |i| {
        let eq = &eqs[i];
        let r = table.residual(eq).expect("table covers the system");
        prop_assert!(r.is_zero(), "table residual {} for {}", r, eq.label());
        let s = engine.borrow_mut().residual(eq, 3).unwrap();
        prop_assert!(s.is_zero(), "series residual {} for {}", s, eq.label());
        Ok(())
    })
}

/// Moments are invariant under rotation and reversal of the word.
pub fn cyclic_and_reversal() -> Result<usize, String> {
    let model = ModelSpec::preset("ggg").unwrap();
    let mut engine = SeriesEngine::new(&model, SeriesEngine::default_max_len(&model, 8, 2));
    let engine = std::cell::RefCell::new(&mut engine);
    run("cyclic/reversal", (word(2, 8), 0..8usize), |(w, k)| {
        let c = w.canonical();
        prop_assert_eq!(w.rotate(k).canonical(), c.clone());
        prop_assert_eq!(w.reverse().canonical(), c.reversed());
        let mut e = engine.borrow_mut();
        let a = e.moment(&c, 2).unwrap();
        let b = e.moment(&c.reversed(), 2).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn poly(v: &Vars) -> impl Strategy<Value = Poly> {
    let v = v.clone();
    prop::collection::vec(((0u32..3, 0u32..3), -5i64..=5), 0..5).prop_map(move |terms| {
        Poly::from_terms(
            &v,
            terms.into_iter().map(|((a, b), c)| {
                (Mono::var(2, 0, a).mul(&Mono::var(2, 1, b)), BigRational::from_integer(c.into()))
            }),
        )
    })
}

/// Commutative ring axioms for polynomials and field identities for
/// rational functions.
pub fn ring_axioms() -> Result<usize, String> {
    let v = vars(&["x", "y"]);
    run("ring axioms", (poly(&v), poly(&v), poly(&v)), |(a, b, c)| {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        if !b.is_zero() {
            let fa = RatFunc::from_poly(a.clone());
            let fb = RatFunc::from_poly(b.clone());
            let q = fa.div(&fb).unwrap();
            prop_assert_eq!(q.mul(&fb), fa);
        }
        Ok(())
    })
}

/// Scaling the observable scales the amplitude, offset and residual but
/// leaves the exponent unchanged.
pub fn fit_scale_equivariance() -> Result<usize, String> {
    let strategy = (50u32..=150, 1u32..=40, 1i32..=30);
    run("fit scale equivariance", strategy, |(p100, lam10, amp)| {
        let (p, lambda, amp) = (p100 as f64 / 100.0, lam10 as f64 / 10.0, amp as f64 / 10.0);
        let gc = -0.05;
        let pts: Vec<(f64, f64)> = (0..32)
            .map(|i| {
                let g = gc + 0.001 + 0.002 * i as f64;
                (g, 1.0 + amp * (g - gc).powf(p))
            })
            .collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(g, y)| (g, lambda * y)).collect();
        // With g_c free the exponent and the residual are equivariant; g_c
        // itself is unidentifiable at p = 1, where the power law is linear.
        let a = fit_exponent(&pts, &FitOptions::default()).unwrap();
        let b = fit_exponent(&scaled, &FitOptions::default()).unwrap();
        prop_assert!((a.p - b.p).abs() < 1e-6, "p {} vs {}", a.p, b.p);
        prop_assert!((b.residual - lambda * a.residual).abs() < 1e-9, "residual {} vs {}", a.residual, b.residual);
        let fixed = FitOptions { gc: Some(gc), ..FitOptions::default() };
        let a = fit_exponent(&pts, &fixed).unwrap();
        let b = fit_exponent(&scaled, &fixed).unwrap();
        prop_assert!((a.p - b.p).abs() < 1e-6, "p {} vs {}", a.p, b.p);
        prop_assert!((b.amplitude - lambda * a.amplitude).abs() < 1e-6 * (1.0 + b.amplitude.abs()));
        prop_assert!((b.offset - lambda * a.offset).abs() < 1e-6 * (1.0 + b.offset.abs()));
        Ok(())
    })
}

/// Every property above; returns the total number of cases.
pub fn run_all() -> Result<usize, String> {
    let suites: [fn() -> Result<usize, String>; 6] = [
        psd_nesting,
        hankel_symmetry,
        sde_residual_zero,
        cyclic_and_reversal,
        ring_axioms,
        fit_scale_equivariance,
    ];
    suites.iter().try_fold(0, |acc, f| Ok(acc + f()?))
}
