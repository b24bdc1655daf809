//! Sequential vs parallel throughput of the data-parallel loops.
//!
//! Without the `parallel` feature both variants run sequentially, which makes
//! the feature's overhead visible as well.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wikitig_core::extract::{extract_pages, split_dump, Page};
use wikitig_core::metrics::{evaluate, paired_bootstrap, EvalOptions};
use wikitig_core::model::{linearize, Cell, InfoboxTable};
use wikitig_core::split::assign_split;
use wikitig_core::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn random_table(rng: &mut ChaCha8Rng) -> String {
    let cells: Vec<Cell> = (0..rng.gen_range(1..16))
        .map(|_| {
            if rng.gen_bool(0.2) {
                Cell::group(&format!("Section {}", rng.gen_range(0..5))).unwrap()
            } else {
                Cell::pair(
                    &format!("Header {}", rng.gen_range(0..30)),
                    &format!("value {} of {}", rng.gen_range(0..50), rng.gen_range(0..9)),
                )
                .unwrap()
            }
        })
        .collect();
    linearize(&InfoboxTable::new(cells).unwrap())
}

fn bench_evaluate(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 2_000;
    let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let generated: Vec<String> = (0..n).map(|_| random_table(&mut rng)).collect();
    let reference: Vec<String> = (0..n).map(|_| random_table(&mut rng)).collect();
    let mut group = c.benchmark_group("evaluate");
    group.throughput(Throughput::Elements(n as u64));
    for (name, exec) in MODES {
        let options = EvalOptions {
            exec,
            ..EvalOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| evaluate(&ids, &generated, &reference, options).unwrap())
        });
    }
    group.finish();
}

fn bench_bootstrap(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a: Vec<f64> = (0..1_000).map(|_| rng.gen()).collect();
    let b: Vec<f64> = (0..1_000).map(|_| rng.gen()).collect();
    let mut group = c.benchmark_group("paired_bootstrap");
    group.throughput(Throughput::Elements(1_000));
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| paired_bootstrap(&a, &b, 1_000, 12_345, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_extract(c: &mut Criterion) {
    let dump = include_bytes!("../tests/fixtures/dump.html");
    let base = split_dump(dump);
    let pages: Vec<Page> = (0..50)
        .flat_map(|k| {
            base.iter().map(move |p| Page {
                id: format!("{k}-{}", p.id),
                bytes: p.bytes.clone(),
            })
        })
        .collect();
    let mut group = c.benchmark_group("extract_pages");
    group.throughput(Throughput::Elements(pages.len() as u64));
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| extract_pages(black_box(&pages), exec))
        });
    }
    group.finish();
}

fn bench_split(c: &mut Criterion) {
    let titles: Vec<String> = (0..100_000).map(|i| format!("Entity {i}")).collect();
    let mut group = c.benchmark_group("assign_split");
    group.throughput(Throughput::Elements(titles.len() as u64));
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(&titles, |t| assign_split(t).unwrap()))
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_evaluate, bench_bootstrap, bench_extract, bench_split
}
criterion_main!(benches);
