use std::hint::black_box;

use billiard_core::beam::detect_conjugate;
use billiard_core::billmap::{chart_to_line, forward_map};
use billiard_core::supportfn::{ellipse_support, table_from_profile};
use billiard_core::wirtinger::reduction_chain;
use billiard_core::{AngleFunction, AngleProfile, BoundaryCoord, SupportSpec};
use criterion::{criterion_group, criterion_main, Criterion};

fn mode6() -> AngleProfile {
    AngleProfile::constant()
        .with_mode(2, 0.1, 0.0)
        .and_then(|p| p.with_mode(6, 0.015, 0.0))
        .unwrap()
}

fn forward(c: &mut Criterion) {
    let tables = [
        ("ellipse", ellipse_support(2.0, 1.0).unwrap()),
        (
            "fourier",
            SupportSpec::fourier(1.0, vec![0.0, 0.05, 0.0, 0.01], vec![0.0, 0.02]).unwrap(),
        ),
        ("profile", table_from_profile(mode6(), 1.0).unwrap()),
    ];
    for (name, spec) in &tables {
        let line = chart_to_line(
            spec,
            BoundaryCoord {
                psi: 0.4,
                delta: 0.9,
            },
        );
        c.bench_function(&format!("forward_map/{name}"), |b| {
            b.iter(|| forward_map(spec, black_box(line)))
        });
    }
}

fn integrals(c: &mut Criterion) {
    let profile = AngleFunction::from(mode6());
    for n in [256, 1024] {
        c.bench_function(&format!("reduction_chain/{n}"), |b| {
            b.iter(|| reduction_chain(&profile, 1.0, black_box(n)))
        });
    }
}

fn conjugate(c: &mut Criterion) {
    let spec = table_from_profile(mode6(), 1.0).unwrap();
    let start = chart_to_line(
        &spec,
        BoundaryCoord {
            psi: 1.0,
            delta: 0.3,
        },
    );
    c.bench_function("detect_conjugate/1000", |b| {
        b.iter(|| detect_conjugate(&spec, black_box(start), 1000))
    });
}

criterion_group!(benches, forward, integrals, conjugate);
criterion_main!(benches);
