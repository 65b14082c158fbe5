use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hextop::optimizer::DensityMap;
use hextop::{
    build_filter, build_mesh, oc_update, wachspress_k0, FeSystem, FilterMode, MaterialModel, MeshSpec, Optimizer,
    OptimizerSettings,
};
use hextop_bench::mbb_fixture;

const SIZES: [(usize, usize); 3] = [(60, 20), (120, 40), (300, 100)];

fn mesh(c: &mut Criterion) {
    let mut g = c.benchmark_group("mesh");
    for (nx, ny) in SIZES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{nx}x{ny}")), &(nx, ny), |b, &(nx, ny)| {
            b.iter(|| build_mesh(MeshSpec::new(nx, ny).unwrap()).unwrap())
        });
    }
    g.finish();
}

fn element(c: &mut Criterion) {
    c.bench_function("k0", |b| b.iter(|| wachspress_k0(black_box(0.3)).unwrap()));
}

fn filter(c: &mut Criterion) {
    let mut g = c.benchmark_group("filter_build");
    g.sample_size(10);
    for (nx, ny) in SIZES {
        let mesh = build_mesh(MeshSpec::new(nx, ny).unwrap()).unwrap();
        let r = 0.04 * nx as f64 * hextop::mesh::SQRT3;
        g.bench_function(format!("{nx}x{ny}"), |b| {
            b.iter(|| build_filter(mesh.centroids(), r, FilterMode::Density).unwrap())
        });
    }
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_solve");
    g.sample_size(10);
    for (nx, ny) in SIZES {
        let (mesh, problem, _) = mbb_fixture(nx, ny, FilterMode::Null);
        let system = FeSystem::new(&mesh, wachspress_k0(0.3).unwrap(), problem.loads.clone()).unwrap();
        let x = vec![0.5; mesh.nelem()];
        let m = MaterialModel::default();
        g.bench_function(format!("{nx}x{ny}"), |b| b.iter(|| system.solve(&x, &m).unwrap()));
    }
    g.finish();
}

fn iteration(c: &mut Criterion) {
    let mut g = c.benchmark_group("design_iteration");
    g.sample_size(10);
    for mode in [FilterMode::Sensitivity, FilterMode::Density] {
        let (mesh, problem, filter) = mbb_fixture(120, 40, mode);
        let settings = OptimizerSettings::default();
        let opt = Optimizer::new(
            &mesh,
            &problem,
            &filter,
            MaterialModel::default(),
            wachspress_k0(0.3).unwrap(),
            settings,
        )
        .unwrap();
        let x = opt.initial_design();
        let map = DensityMap {
            filter: &filter,
            mask: &problem.mask,
        };
        g.bench_function(format!("120x40 ft={mode}"), |b| {
            b.iter(|| {
                let eval = opt.evaluate(&x).unwrap();
                oc_update(&x, &eval.dc, &eval.dv, settings.volfrac, settings.move_limit, &map).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, mesh, element, filter, analysis, iteration);
criterion_main!(benches);
