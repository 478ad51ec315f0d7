use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use subcount::audit::{audit, Protocol};
use subcount::baselines::{nvp_run, psp_run, rr_index_run, NvpVariant, PspConfig};
use subcount::cri::{self, CriParams};
use subcount::criad::{self, select_params, CriadOptions, ParamSearch, ParamTriple};
use subcount::mechanisms::{olh_estimate, OlhConfig, OlhReports, SwConfig, SwReconstructor};
use subcount::RngStream;
use subcount_bench::{sparse_view, zipf_view};

const N: usize = 100_000;

fn clients(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial");
    group.sample_size(20);
    let view = zipf_view(N);
    let stream = RngStream::trial_level(1, 0);

    let small = sparse_view(N, 3);
    let cri_params = CriParams::new(1.0, 3).unwrap();
    group.bench_function("cri d=3", |b| b.iter(|| cri::simulate(&small, &cri_params, &stream)));

    let fixed = CriadOptions {
        params: Some(ParamTriple { m: 37, s: 1, g: 1 }),
        ..CriadOptions::default()
    };
    group.bench_function("criad fixed", |b| {
        b.iter(|| criad::simulate(&view, 1.0, &fixed, &stream).unwrap().estimate)
    });
    group.bench_function("criad pipeline", |b| {
        b.iter(|| {
            criad::simulate(&view, 1.0, &CriadOptions::default(), &stream)
                .unwrap()
                .estimate
        })
    });
    group.bench_function("rr", |b| b.iter(|| rr_index_run(&view, 1.0, &stream).unwrap()));
    for (name, v) in [("nvp-lm", NvpVariant::Lm), ("nvp-pm", NvpVariant::Pm), ("nvp-sw", NvpVariant::Sw)] {
        group.bench_function(name, |b| b.iter(|| nvp_run(&view, 1.0, v, &stream).unwrap()));
    }
    group.bench_function("psp", |b| {
        b.iter(|| psp_run(&view, 1.0, &PspConfig::default(), &stream).unwrap().estimate)
    });
    group.finish();
}

fn selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("select_params");
    let pi = sparse_view(N, 400).pi().unwrap();
    for (name, search) in [("free", ParamSearch::default()), ("s=g=1", ParamSearch::fixed(1, 1))] {
        group.bench_function(BenchmarkId::new("d=400", name), |b| {
            b.iter(|| select_params(400, black_box(1.0), &pi, N, &search).unwrap())
        });
    }
    group.finish();
}

fn reconstruction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reconstruct");
    group.sample_size(20);
    let d = 100;
    let view = sparse_view(10_000, d);
    for eps in [0.2, 1.0, 2.0] {
        let cfg = SwConfig::for_counts(eps, d).unwrap();
        let sampler = cfg.sampler();
        let mut rng = RngStream::new(2, 0, 0).rng(0);
        let reports: Vec<f64> = (0..view.n())
            .map(|u| sampler.perturb(view.ones(u) as f64 / d as f64, &mut rng))
            .collect();
        let recon = SwReconstructor::new(cfg).unwrap();
        group.bench_with_input(BenchmarkId::new("sw", eps), &reports, |b, r| {
            b.iter(|| recon.reconstruct(r).unwrap())
        });
    }

    let olh = OlhConfig::new(1.0).unwrap();
    let k = 110;
    let mut rng = RngStream::new(3, 0, 0).rng(0);
    let mut reports = OlhReports::with_capacity(N);
    for u in 0..N {
        reports.push(olh.perturb((u % k) as u64, &mut rng));
    }
    group.bench_function("olh k=110", |b| b.iter(|| olh_estimate(&reports, k, &olh)));
    group.finish();
}

fn auditing(c: &mut Criterion) {
    let mut group = c.benchmark_group("audit");
    group.sample_size(10);
    let criad = Protocol::Criad {
        params: ParamTriple { m: 2, s: 2, g: 1 },
        partition_seed: 0,
    };
    group.bench_function("criad d=8", |b| b.iter(|| audit(&criad, 8).unwrap()));
    let grouped = Protocol::Criad {
        params: ParamTriple { m: 1, s: 1, g: 3 },
        partition_seed: 0,
    };
    group.bench_function("criad d=9 g=3", |b| b.iter(|| audit(&grouped, 9).unwrap()));
    group.bench_function("cri d=5", |b| {
        b.iter(|| audit(&Protocol::Cri { epsilon_prime: 1.0 }, 5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, clients, selection, reconstruction, auditing);
criterion_main!(benches);
