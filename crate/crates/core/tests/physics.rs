use std::f64::consts::FRAC_PI_8;

use wedge_euler::diagnostics::conserved_totals;
use wedge_euler::initial_data::{build_initial_state, InitialState, MollifierCase, VorticityParams};
use wedge_euler::solver::{run, DGField, FluidParams, NoHooks, SolverSettings, TimeController};
use wedge_euler::Grid;

fn baseline(n: usize, case: MollifierCase, beta: f64) -> InitialState {
    let g = Grid::new(0.2, n).unwrap();
    let vp = VorticityParams {
        alpha: 0.95,
        theta0: FRAC_PI_8,
        epsilon: 0.004,
        case,
    };
    let fp = FluidParams {
        beta,
        ..FluidParams::default()
    };
    build_initial_state(&g, &vp, &fp, 1e-10, 1e-10).unwrap()
}

// Image of a field under (x, y) -> (-x, -y): density is even, momenta odd.
fn reflected(f: &DGField) -> DGField {
    let n = f.grid().n();
    let mut out = f.clone();
    for j in 0..n {
        for i in 0..n {
            let src = f.cell(n - 1 - i, n - 1 - j);
            let k = f.grid().cell_index(i, j);
            out.cells_mut()[k] = [
                [src[0][0], -src[0][1], -src[0][2]],
                [-src[1][0], src[1][1], src[1][2]],
                [-src[2][0], src[2][1], src[2][2]],
            ];
        }
    }
    out
}

fn symmetry_defect(f: &DGField) -> f64 {
    let r = reflected(f);
    let mut defect = 0.0f64;
    let mut scale = [0.0f64; 3];
    for c in f.cells() {
        for q in 0..3 {
            scale[q] = scale[q].max(c[q].iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
    for (a, b) in f.cells().iter().zip(r.cells()) {
        for q in 0..3 {
            for m in 0..3 {
                defect = defect.max((a[q][m] - b[q][m]).abs() / scale[q]);
            }
        }
    }
    defect
}

#[test]
fn point_symmetry_survives_a_short_run() {
    let init = baseline(100, MollifierCase::ConstantCore, 0.0);
    let mut field = init.field.clone();
    field.combine(0.5, &reflected(&init.field), 0.5);
    assert!(symmetry_defect(&field) < 1e-15);
    let mut tc = TimeController::new(0.1, 0.1).unwrap();
    let out = run(field, &mut tc, SolverSettings::default(), &[], &mut NoHooks).unwrap();
    let defect = symmetry_defect(&out);
    assert!(defect <= 1e-8, "symmetry defect {defect:e} after {} steps", tc.steps);
}

#[test]
fn cases_differ_mostly_near_the_core() {
    let a = baseline(200, MollifierCase::ConstantCore, 0.0);
    let b = baseline(200, MollifierCase::EmptyCore, 0.0);
    let g = *a.u.grid();
    let mut max_all = 0.0f64;
    let mut max_far = 0.0f64;
    for j in 0..=g.n() {
        for i in 0..=g.n() {
            let d = (a.u.get(i, j) - b.u.get(i, j)).hypot(a.v.get(i, j) - b.v.get(i, j));
            max_all = max_all.max(d);
            let (x, y) = g.node(i, j);
            if x.hypot(y) > 0.05 {
                max_far = max_far.max(d);
            }
        }
    }
    eprintln!("velocity difference: max {max_all:e}, outside r = 0.05 {max_far:e}, ratio {}", max_far / max_all);
    assert!(max_far < 0.05 * max_all, "ratio {}", max_far / max_all);
}

// The core difference carries net circulation, so outside the core it acts
// like a point vortex of strength `sum (w0 - w2) dx dy`.
#[test]
fn far_field_difference_is_a_point_vortex() {
    let a = baseline(200, MollifierCase::ConstantCore, 0.0);
    let b = baseline(200, MollifierCase::EmptyCore, 0.0);
    let g = *a.u.grid();
    let n = g.n();
    let mut gamma = 0.0;
    for j in 0..=n {
        for i in 0..=n {
            gamma += a.vorticity.get(i, j) - b.vorticity.get(i, j);
        }
    }
    gamma *= g.cell_area();
    let mut worst = 0.0f64;
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = g.node(i, j);
            let r = x.hypot(y);
            if (0.03..=0.06).contains(&r) {
                let d = (a.u.get(i, j) - b.u.get(i, j)).hypot(a.v.get(i, j) - b.v.get(i, j));
                let model = gamma / (2.0 * std::f64::consts::PI * r);
                worst = worst.max((d / model - 1.0).abs());
            }
        }
    }
    eprintln!("circulation {gamma:e}, worst relative deviation {worst}");
    assert!(worst < 0.1, "{worst}");
}

#[test]
fn densities_match_between_cases() {
    let a = baseline(50, MollifierCase::ConstantCore, 1.0);
    let b = baseline(50, MollifierCase::EmptyCore, 1.0);
    for (ca, cb) in a.field.cells().iter().zip(b.field.cells()) {
        assert_eq!(ca[0], cb[0]);
    }
    assert_eq!(conserved_totals(&a.field)[0], conserved_totals(&b.field)[0]);
}
