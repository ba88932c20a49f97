use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lossy_cavity::io_weights::{weights_at, ModeBand, ModeModel};
use lossy_cavity::optical_stack::LayerStack;
use lossy_cavity::par::Exec;
use lossy_cavity::phase_space::{p_out_transform, GridOptions, PhaseSpaceState, TransformInputs};
use lossy_cavity::quadrature::QuadOptions;
use lossy_cavity::resonances::{find_resonance, find_resonances, SolverOptions};
use lossy_cavity::Complex64;
use std::f64::consts::PI;
use std::hint::black_box;

const EXECS: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn mirror() -> LayerStack {
    LayerStack::constant(
        1.0,
        2e-6,
        Complex64::new(1.0, 0.0),
        Complex64::new(1e8, 3.0),
        Complex64::new(1.0, 0.0),
    )
    .unwrap()
}

fn resonance_sweep(c: &mut Criterion) {
    let s = mirror();
    let ks: Vec<u32> = (1..=64).collect();
    let mut g = c.benchmark_group("find_resonances");
    for (name, exec) in EXECS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| find_resonances(black_box(&s), &ks, &SolverOptions::default(), exec))
        });
    }
    g.finish();
}

fn mode_weights(c: &mut Criterion) {
    let s = mirror();
    let r = find_resonance(&s, 1, &SolverOptions::default()).unwrap();
    let m = ModeModel::new(&s, &r).unwrap();
    let band = ModeBand::around(&m, PI, 2.0 / m.gamma).unwrap();
    let mut g = c.benchmark_group("weights_at");
    g.sample_size(10);
    for (name, exec) in EXECS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| weights_at(black_box(&band), &m, &QuadOptions::default(), exec).unwrap())
        });
    }
    g.finish();
}

fn grid_transform(c: &mut Criterion) {
    let inputs = TransformInputs::thermal(
        PhaseSpaceState::fock(2).unwrap(),
        PhaseSpaceState::vacuum(),
        [0.5; 3],
    );
    let w = lossy_cavity::io_weights::ModeWeights {
        eta: 0.8,
        zeta_in: 0.1,
        zeta_cav: 0.05,
        zeta_plus: 0.03,
        zeta_minus: 0.02,
        at: None,
    };
    let mut g = c.benchmark_group("p_out_transform");
    g.sample_size(20);
    for (name, exec) in EXECS {
        let opts = GridOptions {
            half_width: None,
            n: 256,
            exec,
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| p_out_transform(black_box(&inputs), &w, 0.0, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, resonance_sweep, mode_weights, grid_transform);
criterion_main!(benches);
