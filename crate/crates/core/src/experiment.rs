//! Seeded accuracy experiments: every (method, ε, trial) cell runs the full
//! protocol on a fixed dataset and records its estimate.
//!
//! # Config format
//!
//! A flat `key = value` text file; `#` starts a comment, blank lines are
//! ignored, keys may appear once.
//!
//! ```text
//! dataset = synthetic          # or a path to a transaction file
//! n = 100000                   # synthetic only
//! domain_size = 2000           # synthetic only; optional for files
//! shape = zipf:1.2             # synthetic only: uniform | zipf | zipf:<a>
//! mean_set_size = 8            # synthetic only
//! data_seed = 7                # synthetic only
//! category = 1-100             # inclusive item id range
//! methods = CRIAD,RR,NVP-LM,NVP-PM,NVP-SW,PSP,CRI
//! epsilons = 0.2:2.0:0.2       # list a,b,c or start:stop:step
//! trials = 100
//! seed = 1
//! output = records.csv         # optional
//! summary = summary.csv        # optional
//! criad.sample_fraction = 0.1
//! criad.s_max = 64
//! criad.sw_smoothing = 1.0
//! criad.sw_iterations = 1000
//! psp.eta = 5                  # fixed padding length; estimated when absent
//! psp.percentile = 0.9
//! psp.length_fraction = 0.1
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{nvp_run, psp_run, rr_index_run, NvpVariant, PspConfig};
use crate::cri::{self, CriParams};
use crate::criad::{self, CriadOptions, ParamTriple};
use crate::data::{generate_synthetic, load_transactions, Shape, SyntheticSpec};
use crate::domain::{Category, CategoryView, ItemDomain};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Criad,
    Cri,
    Rr,
    NvpLm,
    NvpPm,
    NvpSw,
    Psp,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Criad,
        Method::Cri,
        Method::Rr,
        Method::NvpLm,
        Method::NvpPm,
        Method::NvpSw,
        Method::Psp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Criad => "CRIAD",
            Method::Cri => "CRI",
            Method::Rr => "RR",
            Method::NvpLm => "NVP-LM",
            Method::NvpPm => "NVP-PM",
            Method::NvpSw => "NVP-SW",
            Method::Psp => "PSP",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    File {
        path: PathBuf,
        domain_size: Option<u32>,
    },
    Synthetic(SyntheticSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<crate::Dataset> {
        match self {
            DataSource::File { path, domain_size } => {
                let domain = domain_size.map(ItemDomain::new).transpose()?;
                load_transactions(path, domain)
            }
            DataSource::Synthetic(spec) => generate_synthetic(spec),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub category: Category,
    pub methods: Vec<Method>,
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub criad: CriadOptions,
    pub psp: PspConfig,
}

/// Parses `start:stop:step` (inclusive, to within a thousandth of a step)
/// or a comma-separated list.
pub fn parse_epsilons(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?}"));
    let out: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got {s:?}"));
        }
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(format!("bad range {s:?}"));
        }
        let count = ((stop - start) / step + 1e-3).floor() as usize + 1;
        // round to kill accumulated float noise such as 0.6000000000000001
        (0..count)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect()
    } else {
        s.split(',').map(parse).collect::<std::result::Result<_, _>>()?
    };
    if out.is_empty() {
        return Err("no epsilons".into());
    }
    if let Some(bad) = out.iter().find(|e| !(**e > 0.0)) {
        return Err(format!("epsilon must be positive, got {bad}"));
    }
    Ok(out)
}

fn parse_category(s: &str) -> std::result::Result<Category, String> {
    let (lo, hi) = s
        .split_once('-')
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected lo-hi, got {s:?}"))?;
    let lo = lo.trim().parse().map_err(|_| format!("bad category bound {lo:?}"))?;
    let hi = hi.trim().trim_start_matches('=').parse().map_err(|_| format!("bad category bound {hi:?}"))?;
    Category::range(lo, hi).map_err(|e| e.to_string())
}

const KEYS: &[&str] = &[
    "dataset",
    "n",
    "domain_size",
    "shape",
    "mean_set_size",
    "data_seed",
    "category",
    "methods",
    "epsilons",
    "trials",
    "seed",
    "output",
    "summary",
    "criad.sample_fraction",
    "criad.s_max",
    "criad.sw_smoothing",
    "criad.sw_iterations",
    "psp.eta",
    "psp.percentile",
    "psp.length_fraction",
];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Parses the flat config format; relative paths resolve against the
    /// config file's directory.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_owned(),
            line,
            message,
        };
        let mut kv: HashMap<String, (usize, String)> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, format!("expected key = value, got {line:?}")))?;
            let key = k.trim().to_ascii_lowercase();
            if kv.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(err(i + 1, format!("duplicate key {key:?}")));
            }
        }

        if let Some((key, (line, _))) = kv
            .iter()
            .filter(|(k, _)| !KEYS.contains(&k.as_str()))
            .min_by_key(|(_, (l, _))| *l)
        {
            return Err(err(*line, format!("unknown key {key:?}")));
        }

        let mut take = |key: &str| kv.remove(key);
        fn num<T: FromStr>(entry: &(usize, String), key: &str, path: &Path) -> Result<T> {
            entry.1.parse().map_err(|_| Error::Parse {
                path: path.to_owned(),
                line: entry.0,
                message: format!("bad value for {key}: {:?}", entry.1),
            })
        }
        let base = path.parent().unwrap_or(Path::new("."));

        let dataset = take("dataset").ok_or_else(|| err(0, "missing key dataset".into()))?;
        let synthetic = dataset.1.eq_ignore_ascii_case("synthetic");
        let n = take("n");
        let domain_size = take("domain_size");
        let shape = take("shape");
        let mean = take("mean_set_size");
        let data_seed = take("data_seed");
        let source = if synthetic {
            let shape = match &shape {
                Some(e) => Shape::from_str(&e.1).map_err(|x| err(e.0, x.to_string()))?,
                None => Shape::Zipf(1.2),
            };
            DataSource::Synthetic(SyntheticSpec {
                n: n.as_ref().map(|e| num(e, "n", path)).transpose()?.unwrap_or(100_000),
                domain_size: domain_size
                    .as_ref()
                    .map(|e| num(e, "domain_size", path))
                    .transpose()?
                    .unwrap_or(2000),
                shape,
                mean_set_size: mean
                    .as_ref()
                    .map(|e| num(e, "mean_set_size", path))
                    .transpose()?
                    .unwrap_or(8.0),
                seed: data_seed.as_ref().map(|e| num(e, "data_seed", path)).transpose()?.unwrap_or(0),
            })
        } else {
            for (key, e) in [("n", &n), ("shape", &shape), ("mean_set_size", &mean), ("data_seed", &data_seed)] {
                if let Some(e) = e {
                    return Err(err(e.0, format!("{key} only applies to synthetic data")));
                }
            }
            let p = PathBuf::from(&dataset.1);
            DataSource::File {
                path: if p.is_absolute() { p } else { base.join(p) },
                domain_size: domain_size.as_ref().map(|e| num(e, "domain_size", path)).transpose()?,
            }
        };

        let category = match take("category") {
            Some(e) => parse_category(&e.1).map_err(|m| err(e.0, m))?,
            None => return Err(err(0, "missing key category".into())),
        };
        let methods = match take("methods") {
            Some(e) => {
                let mut ms = Vec::new();
                for part in e.1.split(',').filter(|p| !p.trim().is_empty()) {
                    let m = Method::from_str(part).map_err(|x| err(e.0, x.to_string()))?;
                    if !ms.contains(&m) {
                        ms.push(m);
                    }
                }
                if ms.is_empty() {
                    return Err(err(e.0, "no methods".into()));
                }
                ms
            }
            None => Method::ALL.to_vec(),
        };
        let epsilons = match take("epsilons") {
            Some(e) => parse_epsilons(&e.1).map_err(|m| err(e.0, m))?,
            None => parse_epsilons("0.2:2.0:0.2").expect("default grid"),
        };
        let trials: usize = take("trials").map(|e| num(&e, "trials", path)).transpose()?.unwrap_or(100);
        if trials == 0 {
            return Err(err(0, "trials must be at least 1".into()));
        }
        let master_seed = take("seed").map(|e| num(&e, "seed", path)).transpose()?.unwrap_or(0);
        let resolve = |e: (usize, String)| {
            let p = PathBuf::from(e.1);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let output = take("output").map(resolve);
        let summary = take("summary").map(resolve);

        let mut criad = CriadOptions::default();
        if let Some(e) = take("criad.sample_fraction") {
            criad.sample_fraction = num(&e, "criad.sample_fraction", path)?;
            if !(criad.sample_fraction > 0.0 && criad.sample_fraction < 1.0) {
                return Err(err(e.0, "criad.sample_fraction must lie in (0, 1)".into()));
            }
        }
        if let Some(e) = take("criad.s_max") {
            criad.search.s_max = num(&e, "criad.s_max", path)?;
            if criad.search.s_max == 0 {
                return Err(err(e.0, "criad.s_max must be at least 1".into()));
            }
        }
        if let Some(e) = take("criad.sw_smoothing") {
            criad.sw_smoothing = num(&e, "criad.sw_smoothing", path)?;
            if !(0.0..=1.0).contains(&criad.sw_smoothing) {
                return Err(err(e.0, "criad.sw_smoothing must lie in [0, 1]".into()));
            }
        }
        if let Some(e) = take("criad.sw_iterations") {
            criad.sw_iterations = num(&e, "criad.sw_iterations", path)?;
            if criad.sw_iterations == 0 {
                return Err(err(e.0, "criad.sw_iterations must be at least 1".into()));
            }
        }
        let mut psp = PspConfig::default();
        if let Some(e) = take("psp.eta") {
            let eta: usize = num(&e, "psp.eta", path)?;
            if eta == 0 || eta > category.len() {
                return Err(err(e.0, format!("psp.eta must lie in 1..={}", category.len())));
            }
            psp.eta = Some(eta);
        }
        if let Some(e) = take("psp.percentile") {
            psp.percentile = num(&e, "psp.percentile", path)?;
            if !(psp.percentile > 0.0 && psp.percentile <= 1.0) {
                return Err(err(e.0, "psp.percentile must lie in (0, 1]".into()));
            }
        }
        if let Some(e) = take("psp.length_fraction") {
            psp.length_fraction = num(&e, "psp.length_fraction", path)?;
            if !(psp.length_fraction > 0.0 && psp.length_fraction < 1.0) {
                return Err(err(e.0, "psp.length_fraction must lie in (0, 1)".into()));
            }
        }

        Ok(Self {
            source,
            category,
            methods,
            epsilons,
            trials,
            master_seed,
            output,
            summary,
            criad,
            psp,
        })
    }
}

/// One estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRecord {
    pub method: Method,
    pub epsilon: f64,
    pub trial: usize,
    pub estimate: f64,
    pub truth: u64,
    /// `|estimate - truth| / truth`; the absolute error when `truth = 0`.
    pub relative_error: f64,
}

impl EstimateRecord {
    pub fn new(method: Method, epsilon: f64, trial: usize, estimate: f64, truth: u64) -> Self {
        let abs = (estimate - truth as f64).abs();
        let relative_error = if truth > 0 { abs / truth as f64 } else { abs };
        Self {
            method,
            epsilon,
            trial,
            estimate,
            truth,
            relative_error,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub epsilon: f64,
    pub mre: f64,
    /// Sample standard deviation of the relative errors.
    pub std: f64,
}

/// Mean relative error.
pub fn mre(records: &[EstimateRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Empty("estimate records"));
    }
    Ok(records.iter().map(|r| r.relative_error).sum::<f64>() / records.len() as f64)
}

/// Per-(method, ε) summaries in the order records first appear.
pub fn summarize(records: &[EstimateRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(Method, u64)> = Vec::new();
    let mut groups: HashMap<(Method, u64), Vec<&EstimateRecord>> = HashMap::new();
    for r in records {
        let key = (r.method, r.epsilon.to_bits());
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let n = rs.len() as f64;
            let mean = rs.iter().map(|r| r.relative_error).sum::<f64>() / n;
            let var = if rs.len() > 1 {
                rs.iter().map(|r| (r.relative_error - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            SummaryRow {
                method: key.0,
                epsilon: f64::from_bits(key.1),
                mre: mean,
                std: var.sqrt(),
            }
        })
        .collect()
}

pub const RECORD_HEADER: &str = "method,epsilon,trial,estimate,truth,relative_error";
pub const SUMMARY_HEADER: &str = "method,epsilon,mre,std";

pub fn write_records<W: Write>(w: &mut W, records: &[EstimateRecord]) -> std::io::Result<()> {
    writeln!(w, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.method, r.epsilon, r.trial, r.estimate, r.truth, r.relative_error
        )?;
    }
    Ok(())
}

pub fn write_summary<W: Write>(w: &mut W, rows: &[SummaryRow]) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.method, r.epsilon, r.mre, r.std)?;
    }
    Ok(())
}

/// Runs one method for one trial.
pub fn run_cell(
    view: &CategoryView,
    method: Method,
    epsilon: f64,
    trial: usize,
    master_seed: u64,
    criad_options: &CriadOptions,
    psp: &PspConfig,
) -> Result<f64> {
    let stream = RngStream::trial_level(master_seed, trial as u64);
    match method {
        Method::Criad => Ok(criad::simulate(view, epsilon, criad_options, &stream)?.estimate),
        Method::Cri => Ok(cri::simulate(view, &CriParams::new(epsilon, view.d())?, &stream)),
        Method::Rr => rr_index_run(view, epsilon, &stream),
        Method::NvpLm => nvp_run(view, epsilon, NvpVariant::Lm, &stream),
        Method::NvpPm => nvp_run(view, epsilon, NvpVariant::Pm, &stream),
        Method::NvpSw => nvp_run(view, epsilon, NvpVariant::Sw, &stream),
        Method::Psp => Ok(psp_run(view, epsilon, psp, &stream)?.estimate),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<EstimateRecord>,
    pub summary: Vec<SummaryRow>,
    /// (method, ε) cells skipped because the budget cannot run the method.
    pub skipped: Vec<(Method, f64)>,
}

/// Runs every cell on `view` in parallel. Records come back sorted by the
/// config's method order, then ε order, then trial.
pub fn run_experiment(cfg: &ExperimentConfig, view: &CategoryView) -> Result<ExperimentResult> {
    let truth = view.truth();
    if truth == 0 {
        log::warn!("true count is 0; relative_error holds absolute errors");
    }
    let mut skipped = Vec::new();
    let mut cells = Vec::new();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        for (ei, &eps) in cfg.epsilons.iter().enumerate() {
            if method == Method::Cri {
                if let Err(e) = CriParams::new(eps, view.d()) {
                    log::warn!("skipping CRI at epsilon {eps}: {e}");
                    skipped.push((method, eps));
                    continue;
                }
            }
            cells.extend((0..cfg.trials).map(|t| (mi, ei, t)));
        }
    }
    log::info!("running {} cells over {} users, d = {}", cells.len(), view.n(), view.d());
    let mut out: Vec<((usize, usize, usize), EstimateRecord)> = cells
        .into_par_iter()
        .map(|(mi, ei, t)| {
            let (method, eps) = (cfg.methods[mi], cfg.epsilons[ei]);
            let est = run_cell(view, method, eps, t, cfg.master_seed, &cfg.criad, &cfg.psp)?;
            Ok(((mi, ei, t), EstimateRecord::new(method, eps, t, est, truth)))
        })
        .collect::<Result<_>>()?;
    out.sort_by_key(|(k, _)| *k);
    let records: Vec<EstimateRecord> = out.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(&records);
    Ok(ExperimentResult {
        records,
        summary,
        skipped,
    })
}

/// Loads the dataset, runs the experiment, and writes the configured CSVs.
pub fn run_from_config(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let dataset = cfg.source.load()?;
    cfg.category.validate(dataset.domain())?;
    let view = CategoryView::new(&dataset, &cfg.category);
    let result = run_experiment(cfg, &view)?;
    let write = |path: &Path, f: &dyn Fn(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>| {
        let io = |source| Error::Io {
            path: path.to_owned(),
            source,
        };
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        f(&mut w).and_then(|_| w.flush()).map_err(io)
    };
    if let Some(p) = &cfg.output {
        write(p, &|w| write_records(w, &result.records))?;
    }
    if let Some(p) = &cfg.summary {
        write(p, &|w| write_summary(w, &result.summary))?;
    }
    Ok(result)
}

/// Parameter choices of the CRIAD prelude over `repeats` seeds, most frequent
/// first (ties by triple order).
pub fn param_study(
    view: &CategoryView,
    epsilon: f64,
    repeats: usize,
    master_seed: u64,
    options: &CriadOptions,
) -> Result<Vec<(ParamTriple, usize)>> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let picks: Vec<ParamTriple> = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let stream = RngStream::trial_level(master_seed, r as u64);
            let (pi, n) = if options.exact_pi {
                (view.pi()?, view.n())
            } else {
                let sw = crate::mechanisms::SwConfig::for_counts(epsilon, view.d())?
                    .with_smoothing(options.sw_smoothing)
                    .with_iterations(options.sw_iterations);
                let est = criad::estimate_pi_pipeline(view, options.sample_fraction, &sw, &stream)?;
                let n = est.remainder.len();
                (est.pi, n)
            };
            criad::select_params(view.d(), epsilon, &pi, n, &options.search)
        })
        .collect::<Result<_>>()?;
    let mut freq: BTreeMap<ParamTriple, usize> = BTreeMap::new();
    for p in picks {
        *freq.entry(p).or_default() += 1;
    }
    let mut out: Vec<(ParamTriple, usize)> = freq.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
# small run
dataset = synthetic
n = 2000
domain_size = 200
shape = zipf:1.1
mean_set_size = 5
data_seed = 3
category = 1-20
methods = CRIAD, RR, NVP-LM
epsilons = 0.5:1.5:0.5
trials = 3
seed = 11
";

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("/tmp/x.cfg"))
    }

    #[test]
    fn parses_config() {
        let cfg = parse(BASIC).unwrap();
        assert_eq!(cfg.methods, vec![Method::Criad, Method::Rr, Method::NvpLm]);
        assert_eq!(cfg.epsilons, vec![0.5, 1.0, 1.5]);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.master_seed, 11);
        assert_eq!(cfg.category.len(), 20);
        assert!(matches!(cfg.source, DataSource::Synthetic(SyntheticSpec { n: 2000, .. })));
    }

    #[test]
    fn epsilon_grids() {
        let g = parse_epsilons("0.2:2.0:0.2").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[2], 0.6);
        assert_eq!(g[9], 2.0);
        assert_eq!(parse_epsilons("1, 2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_epsilons("0,1").is_err());
        assert!(parse_epsilons("1:0:0.1").is_err());
    }

    #[test]
    fn config_errors_carry_lines() {
        let bad = BASIC.replace("trials = 3", "trials = three");
        assert!(matches!(parse(&bad), Err(Error::Parse { line: 11, .. })));
        let unknown = format!("{BASIC}colour = blue\n");
        assert!(matches!(parse(&unknown), Err(Error::Parse { line: 13, .. })));
        let dup = format!("{BASIC}seed = 2\n");
        assert!(parse(&dup).is_err());
        assert!(parse(&BASIC.replace("CRIAD, RR", "CRIAD, XX")).is_err());
        assert!(parse(&BASIC.replace("category = 1-20", "")).is_err());
        let file_with_n = "dataset = data.txt\nn = 5\ncategory = 1-4\n";
        assert!(parse(file_with_n).is_err());
    }

    #[test]
    fn relative_paths_follow_config() {
        let cfg = parse("dataset = data.txt\ncategory = 1-4\noutput = out.csv\n").unwrap();
        assert_eq!(cfg.output.unwrap(), PathBuf::from("/tmp/out.csv"));
        match cfg.source {
            DataSource::File { path, .. } => assert_eq!(path, PathBuf::from("/tmp/data.txt")),
            _ => panic!(),
        }
    }

    #[test]
    fn mre_examples() {
        let rs = |ests: &[f64]| -> Vec<EstimateRecord> {
            ests.iter()
                .enumerate()
                .map(|(i, &e)| EstimateRecord::new(Method::Rr, 1.0, i, e, 100))
                .collect()
        };
        assert_eq!(mre(&rs(&[100.0, 100.0])).unwrap(), 0.0);
        assert!((mre(&rs(&[110.0, 90.0])).unwrap() - 0.1).abs() < 1e-12);
        assert!(mre(&[]).is_err());
        let zero = EstimateRecord::new(Method::Rr, 1.0, 0, -3.5, 0);
        assert_eq!(zero.relative_error, 3.5);
    }

    #[test]
    fn run_is_sorted_and_deterministic() {
        let cfg = parse(BASIC).unwrap();
        let ds = cfg.source.load().unwrap();
        let view = CategoryView::new(&ds, &cfg.category);
        let a = run_experiment(&cfg, &view).unwrap();
        let b = run_experiment(&cfg, &view).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 3 * 3 * 3);
        assert_eq!(a.summary.len(), 9);
        assert_eq!(a.records[0].method, Method::Criad);
        assert_eq!(a.records[3].epsilon, 1.0);
        for r in &a.records {
            let again = EstimateRecord::new(r.method, r.epsilon, r.trial, r.estimate, r.truth);
            assert_eq!(again.relative_error, r.relative_error);
        }
        let mut buf = Vec::new();
        write_records(&mut buf, &a.records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,epsilon,trial,estimate,truth,relative_error\nCRIAD,0.5,0,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn infeasible_cri_cells_are_skipped() {
        let cfg = parse(&BASIC.replace("CRIAD, RR, NVP-LM", "CRI").replace("0.5:1.5:0.5", "1,4"))
            .unwrap();
        let ds = cfg.source.load().unwrap();
        let view = CategoryView::new(&ds, &cfg.category);
        let res = run_experiment(&cfg, &view).unwrap();
        // ln 19 ≈ 2.94: only ε = 4 runs
        assert_eq!(res.skipped, vec![(Method::Cri, 1.0)]);
        assert!(res.records.iter().all(|r| r.epsilon == 4.0));
    }

    #[test]
    fn noiseless_laplace_is_exact() {
        let cfg = parse(&BASIC.replace("CRIAD, RR, NVP-LM", "NVP-LM").replace("0.5:1.5:0.5", "1000000"))
            .unwrap();
        let ds = cfg.source.load().unwrap();
        let view = CategoryView::new(&ds, &cfg.category);
        let res = run_experiment(&cfg, &view).unwrap();
        assert!(res.summary[0].mre < 1e-6);
    }

    #[test]
    fn exact_pi_study_is_deterministic() {
        let counts: Vec<usize> = (0..3000).map(|u| u % 30).collect();
        let view = CategoryView::from_counts(400, &counts).unwrap();
        let opts = CriadOptions {
            exact_pi: true,
            ..CriadOptions::default()
        };
        let table = param_study(&view, 1.0, 5, 0, &opts).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].1, 5);
    }
}
