use subcount::criad::{criad_aggregate, criad_client, ParamTriple, Partition};
use subcount::data::{generate_synthetic, load_transactions, save_transactions, Shape, SyntheticSpec};
use subcount::experiment::{run_from_config, ExperimentConfig, Method};
use subcount::{filter_and_encode, pi_distribution, true_subset_count, Category, CategoryView, RngStream};

fn spec(n: usize) -> SyntheticSpec {
    SyntheticSpec {
        n,
        domain_size: 200,
        shape: Shape::Zipf(1.1),
        mean_set_size: 6.0,
        seed: 5,
    }
}

#[test]
fn view_agrees_with_dataset() {
    let data = generate_synthetic(&spec(3000)).unwrap();
    let cat = Category::range(1, 25).unwrap();
    let view = CategoryView::new(&data, &cat);
    assert_eq!(view.truth(), true_subset_count(&data, &cat));
    assert_eq!(view.pi().unwrap(), pi_distribution(&data, &cat).unwrap());
    for u in [0, 17, 2999] {
        assert_eq!(view.encode(u), filter_and_encode(&data.records()[u], &cat));
    }
}

#[test]
fn transactions_round_trip() {
    let data = generate_synthetic(&spec(400)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tx.txt");
    save_transactions(&data, &path).unwrap();
    let back = load_transactions(&path, Some(data.domain())).unwrap();
    assert_eq!(back.records(), data.records());
}

#[test]
fn literal_clients_are_unbiased() {
    let data = generate_synthetic(&spec(2000)).unwrap();
    let cat = Category::range(1, 12).unwrap();
    let view = CategoryView::new(&data, &cat);
    let params = ParamTriple { m: 3, s: 2, g: 2 };
    let partition = Partition::new(12, 2, 99).unwrap();
    // nobody may exceed d/g - m = 3 ones in a group for the mean to be exact
    let conforming: Vec<usize> = (0..view.n())
        .filter(|&u| {
            let mut c = [0usize; 2];
            partition.group_counts(view.positions(u), &mut c);
            c.iter().all(|&x| x <= 3)
        })
        .collect();
    let vectors: Vec<_> = conforming.iter().map(|&u| view.encode(u)).collect();
    let truth: usize = vectors.iter().map(|v| v.ones()).sum();
    let trials = 400;
    let mut estimates = Vec::with_capacity(trials);
    for t in 0..trials {
        let stream = RngStream::trial_level(7, t as u64);
        let reports: Vec<_> = vectors
            .iter()
            .enumerate()
            .map(|(u, v)| criad_client(v, &params, &partition, &mut stream.for_user(u as u64).rng(0)).unwrap())
            .collect();
        estimates.push(criad_aggregate(&reports, reports.len(), 12, &params).unwrap());
    }
    let mean = estimates.iter().sum::<f64>() / trials as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let se = (var / trials as f64).sqrt();
    assert!((mean - truth as f64).abs() < 4.0 * se, "mean {mean} truth {truth} se {se}");
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg_path,
        "dataset = synthetic\nn = 2000\ndomain_size = 100\nmean_set_size = 4\n\
         category = 1-10\nmethods = CRI, CRIAD, PSP\nepsilons = 1, 3\ntrials = 2\n\
         output = out.csv\nsummary = sum.csv\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    let result = run_from_config(&cfg).unwrap();
    // CRI at ε = 1 needs ln(9) < 1 and is skipped
    assert_eq!(result.skipped, vec![(Method::Cri, 1.0)]);
    assert_eq!(result.records.len(), 5 * 2);
    let out = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(out.lines().count(), 11);
    let sum = std::fs::read_to_string(dir.path().join("sum.csv")).unwrap();
    assert_eq!(sum.lines().count(), 6);
}
