mod common;

use common::{c, Profile};
use lossy_cavity::green_function::{
    absorption_identity_residual, derivative_jump, green, helmholtz_richardson, LayeredGreen,
};
use lossy_cavity::optical_stack::LayerStack;
use lossy_cavity::quadrature::QuadOptions;
use proptest::prelude::*;

fn absorbing() -> LayerStack {
    LayerStack::constant(1.0, 0.1, c(1.0, 0.02), c(6.0, 0.4), c(1.0, 0.0)).unwrap()
}

fn positions(s: &LayerStack) -> Vec<(usize, f64)> {
    vec![
        (1, 0.0),
        (1, 0.31 * s.l),
        (1, 0.93 * s.l),
        (2, 0.0),
        (2, 0.5 * s.d),
        (2, s.d),
        (3, 0.0),
        (3, 0.8),
    ]
}

#[test]
fn matches_wronskian_construction() {
    let s = absorbing();
    for w in [0.7, 3.1, 9.4] {
        let g = LayeredGreen::new(&s, w).unwrap();
        let p = Profile::new(&s, w);
        for &(j, z) in &positions(&s) {
            for &(jp, zp) in &positions(&s) {
                let ours = g.eval(j, z, jp, zp).unwrap();
                let oracle = p.green(p.global(j, z), p.global(jp, zp));
                assert!(
                    (ours - oracle).norm() < 1e-12 * (1.0 + oracle.norm()),
                    "w={w} ({j},{z}) ({jp},{zp}): {ours} vs {oracle}"
                );
            }
        }
    }
}

#[test]
fn layer_boundaries_are_continuous() {
    let s = absorbing();
    let g = LayeredGreen::new(&s, 2.3).unwrap();
    let a = g.eval(1, s.l, 1, 0.4).unwrap();
    let b = g.eval(2, 0.0, 1, 0.4).unwrap();
    assert!((a - b).norm() < 1e-14);
    let a = g.eval(2, s.d, 1, 0.4).unwrap();
    let b = g.eval(3, 0.0, 1, 0.4).unwrap();
    assert!((a - b).norm() < 1e-14);
}

#[test]
fn second_order_stencil_converges() {
    let s = absorbing();
    for (j, z, zp) in [(1, 0.7, 0.2), (2, 0.05, 0.02), (3, 1.5, 0.3)] {
        let r = helmholtz_richardson(&s, j, z, zp, 2.6, 1e-2).unwrap();
        assert!((r.ratio - 4.0).abs() < 0.3, "layer {j}: ratio {}", r.ratio);
    }
}

#[test]
fn unit_jump_in_every_layer() {
    let s = absorbing();
    for (j, zp) in [(1, 0.6), (2, 0.05), (3, 0.9)] {
        let jump = derivative_jump(&s, j, zp, 3.7, 1e-5).unwrap();
        assert!((jump + 1.0).norm() < 1e-7, "layer {j}: {jump}");
    }
}

#[test]
fn absorption_identity_for_absorbing_stacks() {
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        ..Default::default()
    };
    for s in [
        absorbing(),
        LayerStack::constant(1.0, 0.02, c(1.0, 0.0), c(400.0, 2.0), c(1.0, 0.0)).unwrap(),
        LayerStack::constant(1.0, 0.2, c(2.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)).unwrap(),
    ] {
        for (z1, z2) in [(0.3, 0.3), (0.2, 0.8)] {
            let id = absorption_identity_residual(&s, z1, z2, 2.9, &opts).unwrap();
            assert!(id.relative_residual < 1e-8, "{id:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reciprocity(
        e1 in 1.0f64..6.0, e1i in 0.0f64..0.5, e2 in 1.0f64..6.0, e2i in 0.0f64..0.5,
        d in 0.01f64..0.5, w in 0.5f64..10.0,
        a in 0usize..8, b in 0usize..8,
    ) {
        let s = LayerStack::constant(1.0, d, c(e1, e1i), c(e2, e2i), c(1.0, 0.0)).unwrap();
        let pos = positions(&s);
        let (j, z) = pos[a];
        let (jp, zp) = pos[b];
        let g1 = green(&s, j, z, jp, zp, w).unwrap();
        let g2 = green(&s, jp, zp, j, z, w).unwrap();
        prop_assert!((g1 - g2).norm() < 1e-12 * (1.0 + g1.norm()));
    }

    #[test]
    fn wronskian_oracle_random(
        e1 in 1.0f64..6.0, e1i in 0.0f64..0.5, e2 in 1.0f64..6.0, e2i in 0.0f64..0.5,
        e3 in 1.0f64..6.0, d in 0.01f64..0.5, w in 0.5f64..10.0,
        x in 0.0f64..1.0, xp in 0.0f64..2.0,
    ) {
        let s = LayerStack::constant(1.0, d, c(e1, e1i), c(e2, e2i), c(e3, 0.0)).unwrap();
        let p = Profile::new(&s, w);
        let locate = |g: f64| {
            if g <= 1.0 { (1, g) } else if g <= 1.0 + d { (2, g - 1.0) } else { (3, g - 1.0 - d) }
        };
        let (j, z) = locate(x);
        let (jp, zp) = locate(xp);
        let ours = green(&s, j, z, jp, zp, w).unwrap();
        let oracle = p.green(x, xp);
        prop_assert!((ours - oracle).norm() < 1e-11 * (1.0 + oracle.norm()));
    }
}
