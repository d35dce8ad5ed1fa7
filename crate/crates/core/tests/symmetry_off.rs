//! Runs with the declared symmetries switched off must agree with the
//! symmetry-reduced ones wherever both are defined.

use momenta::hankel::{build_hankel, HankelSpec};
use momenta::reduce::{necklaces, solve_moments};
use momenta::scan::{grid_range, scan_matrix, whole, GridSpec};
use momenta::sde::generate_system;
use momenta::series::SeriesEngine;
use momenta::{BigRational, Execution, ModelSpec};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn quartic_table_with_odd_generator() {
    let sym = ModelSpec::preset("quartic").unwrap();
    let plain = sym
        .without_symmetries()
        .with_generators(&["A".parse().unwrap(), "AA".parse().unwrap()])
        .unwrap();
    let a = solve_moments(&sym, 8).unwrap();
    let b = solve_moments(&plain, 8).unwrap();
    assert!(b.is_closed());
    let m1 = plain.generator_var(&"A".parse().unwrap()).unwrap();
    for w in necklaces(1, 8) {
        let odd = b.get(&w).unwrap().specialize(m1, &r(0, 1)).unwrap();
        match a.get(&w) {
            Some(f) => assert_eq!(odd.to_string(), f.to_string(), "{w}"),
            None => assert!(odd.is_zero(), "{w} should vanish at m1 = 0, got {odd}"),
        }
    }
}

#[test]
fn two_matrix_series_agree() {
    let sym = ModelSpec::preset("ggg").unwrap();
    let plain = sym.without_symmetries();
    let mut a = SeriesEngine::new(&sym, SeriesEngine::default_max_len(&sym, 6, 3));
    let mut b = SeriesEngine::new(&plain, SeriesEngine::default_max_len(&plain, 6, 3));
    for w in necklaces(2, 6) {
        assert_eq!(a.moment(&w, 3).unwrap(), b.moment(&w, 3).unwrap(), "{w}");
    }
}

#[test]
fn unreduced_system_is_larger_and_consistent() {
    let model = ModelSpec::preset("ggg").unwrap();
    let reduced = generate_system(&model, 4, true);
    let full = generate_system(&model, 4, false);
    assert!(full.len() > reduced.len());
    let mut engine = SeriesEngine::new(&model, SeriesEngine::default_max_len(&model, 8, 3));
    for eq in &full {
        assert!(engine.residual(eq, 3).unwrap().is_zero(), "{}", eq.label());
    }
}

#[test]
fn sector_blocks_do_not_change_verdicts() {
    let model = ModelSpec::preset("ggg").unwrap();
    let spec = HankelSpec::new(2, 7);
    let table = solve_moments(&model, spec.max_entry_len()).unwrap();
    let h = build_hankel(&model, &table, 7).unwrap();
    let grid = GridSpec {
        g: grid_range(&r(-1, 8), &r(1, 2), &r(1, 32)),
        axes: vec![("m2".into(), grid_range(&r(0, 1), &r(2, 1), &r(1, 32)))],
    };
    let sectors = scan_matrix(&h, &spec.sector_blocks(&model), &grid, Execution::Sequential);
    let full = scan_matrix(&h, &whole(7), &grid, Execution::Sequential);
    assert_eq!(sectors.cells, full.cells);
}
