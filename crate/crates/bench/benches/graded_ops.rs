//! Criterion benchmarks for the per-degree hot paths: graded pieces, power
//! towers, commutator series with Schatten sums, and similarity blocks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use num_complex::Complex64;

use dalab_core::essnorm::{build_commutator_series, schatten_partial_sum, GradedModule, ModuleSpec};
use dalab_core::fock::{full_commutator_block, shift_block, HomogeneousPolynomial, MultiIndex};
use dalab_core::geometry::closedness_witness;
use dalab_core::linalg::Thresholds;
use dalab_core::similarity::{polar_analysis, LinearMapSpec, SimilarityModel};
use dalab_core::variety::{
    quotient_graded_piece, IdealSpec, PowerTower, SubspaceComponent, VarietySpec,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn line(coords: &[f64]) -> SubspaceComponent {
    let v: Vec<Complex64> = coords.iter().map(|&x| c(x, 0.0)).collect();
    SubspaceComponent::line(&v).unwrap()
}

fn two_line_variety(cos: f64) -> VarietySpec {
    VarietySpec::components(vec![
        line(&[1.0, 0.0]),
        line(&[cos, (1.0 - cos * cos).sqrt()]),
    ])
    .unwrap()
}

fn bench_shift_blocks(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("shift_blocks");
    for (d, n) in [(2usize, 20u32), (3, 12), (4, 8)] {
        group.bench_with_input(BenchmarkId::new("assemble", format!("d{d}_n{n}")), &(d, n), |b, &(d, n)| {
            b.iter(|| shift_block(d, 0, n))
        });
        group.bench_with_input(
            BenchmarkId::new("commutator", format!("d{d}_n{n}")),
            &(d, n),
            |b, &(d, n)| b.iter(|| full_commutator_block(d, 0, 1, n)),
        );
    }
    group.finish();
}

fn bench_graded_pieces(cr: &mut Criterion) {
    let thr = Thresholds::default();
    let mut group = cr.benchmark_group("graded_pieces");

    let monomial = IdealSpec::new(
        2,
        vec![HomogeneousPolynomial::monomial(2, MultiIndex::new(vec![1, 1]), c(1.0, 0.0)).unwrap()],
        true,
    )
    .unwrap();
    group.bench_function("quotient_monomial_d2_n30", |b| {
        b.iter(|| quotient_graded_piece(&monomial, 30, &thr))
    });

    let mut sphere = HomogeneousPolynomial::zero(3, 2);
    sphere.add_term(MultiIndex::new(vec![2, 0, 0]), c(1.0, 0.0)).unwrap();
    sphere.add_term(MultiIndex::new(vec![0, 2, 0]), c(1.0, 0.0)).unwrap();
    sphere.add_term(MultiIndex::new(vec![0, 0, 2]), c(1.0, 0.0)).unwrap();
    let general = IdealSpec::new(3, vec![sphere], false).unwrap();
    group.bench_function("quotient_svd_d3_n12", |b| {
        b.iter(|| quotient_graded_piece(&general, 12, &thr))
    });

    let plane = SubspaceComponent::new(DMatrix::from_column_slice(4, 2, &[
        c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
        c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
    ]))
    .unwrap();
    group.bench_function("power_tower_plane_d4_n25", |b| {
        b.iter(|| PowerTower::build(&plane, 25))
    });
    group.finish();
}

fn bench_angles_and_closedness(cr: &mut Criterion) {
    let thr = Thresholds::default();
    let components = vec![
        line(&[1.0, 0.0, 0.0]),
        line(&[0.4040610178208843, 0.9091372900969896, 0.10101525445522108]),
        line(&[0.2279211529192759, -0.3418817293789138, 0.9116846116771036]),
    ];
    cr.bench_function("closedness_three_lines_n30", |b| {
        b.iter(|| closedness_witness(&components, 30, &thr))
    });
}

fn bench_essnorm(cr: &mut Criterion) {
    let thr = Thresholds::default();
    let module = GradedModule::build(&ModuleSpec::Variety(two_line_variety(0.6)), 50, &thr);
    cr.bench_function("commutator_series_two_lines_n50", |b| {
        b.iter(|| {
            let series = build_commutator_series(&module, 0, 1, &thr).unwrap();
            schatten_partial_sum(&series, 1.5, 49).unwrap()
        })
    });
}

fn bench_similarity(cr: &mut Criterion) {
    let thr = Thresholds::default();
    let cos = 0.6f64;
    let s = (1.0 - cos * cos).sqrt();
    let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(cos, 0.0), c(0.0, 0.0), c(s, 0.0)]);
    let spec = LinearMapSpec::new(
        a,
        vec![line(&[1.0, 0.0]), line(&[0.0, 1.0])],
        vec![line(&[1.0, 0.0]), line(&[cos, s])],
    )
    .unwrap();
    cr.bench_function("similarity_polar_two_lines_n30", |b| {
        b.iter(|| {
            let model = SimilarityModel::build(spec.clone(), 30, &thr).unwrap();
            polar_analysis(&model, 30, &thr).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_shift_blocks,
    bench_graded_pieces,
    bench_angles_and_closedness,
    bench_essnorm,
    bench_similarity
);
criterion_main!(benches);
