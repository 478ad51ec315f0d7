//! Transaction files and synthetic datasets.
//!
//! The text format is one user per line, item ids as ASCII decimals separated
//! by single spaces, LF line endings. An empty line is a user with no items.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson, Zipf};

use crate::domain::{Dataset, ItemDomain, ItemId, UserItemSet};
use crate::error::{invalid, Error, Result};
use crate::rng::{tag, RngStream};

/// Reads a transaction file. With `domain = None` the domain size is the
/// largest id seen (at least 1).
pub fn load_transactions(path: &Path, domain: Option<ItemDomain>) -> Result<Dataset> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    read_transactions(BufReader::new(file), path, domain)
}

pub fn read_transactions<R: BufRead>(
    reader: R,
    path: &Path,
    domain: Option<ItemDomain>,
) -> Result<Dataset> {
    let mut records = Vec::new();
    let mut max_id = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let mut items = Vec::new();
        for tok in line.split_ascii_whitespace() {
            let id = ItemId::from_str(tok).map_err(|_| Error::Parse {
                path: path.to_owned(),
                line: line_no,
                message: format!("not an item id: {tok:?}"),
            })?;
            let in_range = match domain {
                Some(dom) => dom.contains(id),
                None => id >= 1,
            };
            if !in_range {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: line_no,
                    message: format!("item id {id} out of range"),
                });
            }
            max_id = max_id.max(id);
            items.push(id);
        }
        records.push(UserItemSet::new(items));
    }
    let domain = match domain {
        Some(d) => d,
        None => ItemDomain::new(max_id.max(1))?,
    };
    Dataset::new(domain, records)
}

pub fn save_transactions(dataset: &Dataset, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write_transactions(dataset, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn write_transactions<W: Write>(dataset: &Dataset, w: &mut W) -> std::io::Result<()> {
    for r in dataset.records() {
        let mut first = true;
        for id in r.items() {
            if !first {
                w.write_all(b" ")?;
            }
            write!(w, "{id}")?;
            first = false;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Item popularity law for synthetic data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Uniform,
    /// `Pr[item k] ∝ k^{-a}`.
    Zipf(f64),
}

impl FromStr for Shape {
    type Err = Error;

    /// `uniform`, `zipf` (exponent 1.2) or `zipf:<a>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("uniform") {
            return Ok(Shape::Uniform);
        }
        let lower = s.to_ascii_lowercase();
        if lower == "zipf" {
            return Ok(Shape::Zipf(1.2));
        }
        if let Some(a) = lower.strip_prefix("zipf:").or(lower.strip_prefix("zipf(")) {
            let a = a.trim_end_matches(')');
            let a: f64 = a
                .parse()
                .map_err(|_| invalid(format!("bad zipf exponent {a:?}")))?;
            return Ok(Shape::Zipf(a));
        }
        Err(invalid(format!("unknown shape {s:?}")))
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::Uniform => write!(f, "uniform"),
            Shape::Zipf(a) => write!(f, "zipf:{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub domain_size: u32,
    pub shape: Shape,
    pub mean_set_size: f64,
    pub seed: u64,
}

/// Draws `n` users whose set sizes are Poisson(`mean_set_size`) capped at the
/// domain size, with items drawn without replacement from `shape`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n == 0 {
        return Err(invalid("synthetic dataset needs at least one user"));
    }
    let domain = ItemDomain::new(spec.domain_size)?;
    if !(spec.mean_set_size > 0.0) || spec.mean_set_size > spec.domain_size as f64 {
        return Err(invalid(format!(
            "mean set size {} must lie in (0, {}]",
            spec.mean_set_size, spec.domain_size
        )));
    }
    let poisson = Poisson::new(spec.mean_set_size).map_err(|e| invalid(e.to_string()))?;
    let zipf = match spec.shape {
        Shape::Uniform => None,
        Shape::Zipf(a) => {
            if !(a > 0.0) {
                return Err(invalid(format!("zipf exponent must be positive, got {a}")));
            }
            Some(Zipf::new(spec.domain_size as u64, a).map_err(|e| invalid(e.to_string()))?)
        }
    };
    let m = spec.domain_size as usize;
    let stream = RngStream::new(spec.seed, 0, 0);
    let records = (0..spec.n)
        .map(|u| {
            let mut rng = stream.for_user(u as u64).rng(tag("synthetic"));
            let k = (poisson.sample(&mut rng) as usize).min(m);
            let items: Vec<ItemId> = match (&zipf, spec.shape) {
                (None, _) => index::sample(&mut rng, m, k)
                    .into_iter()
                    .map(|i| i as ItemId + 1)
                    .collect(),
                (Some(z), Shape::Zipf(a)) => zipf_without_replacement(&mut rng, z, a, m, k),
                _ => unreachable!(),
            };
            UserItemSet::new(items)
        })
        .collect();
    Dataset::new(domain, records)
}

fn zipf_without_replacement<R: Rng>(rng: &mut R, z: &Zipf<f64>, a: f64, m: usize, k: usize) -> Vec<ItemId> {
    // Rejection is fast while k is small against m; otherwise fall back to
    // weighted sampling without replacement over the whole domain.
    if k * 4 <= m {
        let mut out: Vec<ItemId> = Vec::with_capacity(k);
        let mut tries = 0usize;
        while out.len() < k && tries < 64 * (k + 1) {
            let id = z.sample(rng) as ItemId;
            if !out.contains(&id) {
                out.push(id);
            }
            tries += 1;
        }
        if out.len() == k {
            return out;
        }
    }
    index::sample_weighted(rng, m, |i| ((i + 1) as f64).powf(-a), k)
        .expect("zipf weights are positive")
        .into_iter()
        .map(|i| i as ItemId + 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<Dataset> {
        read_transactions(Cursor::new(text), Path::new("mem"), None)
    }

    #[test]
    fn parses_lines_and_empty_users() {
        let ds = parse("3 7 12\n\n5\n").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.records()[0].items(), &[3, 7, 12]);
        assert!(ds.records()[1].is_empty());
        assert_eq!(ds.domain().size(), 12);
    }

    #[test]
    fn reports_bad_line_number() {
        match parse("1 2\n3 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match read_transactions(Cursor::new("1\n2 9\n"), Path::new("mem"), Some(ItemDomain::new(5).unwrap())) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("0\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn file_round_trip() {
        let spec = SyntheticSpec {
            n: 300,
            domain_size: 50,
            shape: Shape::Zipf(1.1),
            mean_set_size: 4.0,
            seed: 3,
        };
        let ds = generate_synthetic(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.dat");
        save_transactions(&ds, &path).unwrap();
        let back = load_transactions(&path, Some(ds.domain())).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec {
            n: 500,
            domain_size: 100,
            shape: Shape::Zipf(1.2),
            mean_set_size: 6.0,
            seed: 99,
        };
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec { seed: 100, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn dense_sets_fill_the_domain() {
        let spec = SyntheticSpec {
            n: 50,
            domain_size: 8,
            shape: Shape::Zipf(2.0),
            mean_set_size: 8.0,
            seed: 1,
        };
        let ds = generate_synthetic(&spec).unwrap();
        assert!(ds.records().iter().all(|r| r.len() <= 8));
        assert!(ds.records().iter().any(|r| r.len() == 8));
    }

    #[test]
    fn rejects_bad_specs() {
        let ok = SyntheticSpec {
            n: 10,
            domain_size: 10,
            shape: Shape::Uniform,
            mean_set_size: 2.0,
            seed: 0,
        };
        assert!(generate_synthetic(&SyntheticSpec { n: 0, ..ok.clone() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { mean_set_size: 11.0, ..ok.clone() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { shape: Shape::Zipf(0.0), ..ok }).is_err());
    }

    #[test]
    fn parses_shapes() {
        assert_eq!("uniform".parse::<Shape>().unwrap(), Shape::Uniform);
        assert_eq!("zipf:1.5".parse::<Shape>().unwrap(), Shape::Zipf(1.5));
        assert_eq!("zipf(1.2)".parse::<Shape>().unwrap(), Shape::Zipf(1.2));
        assert!("normal".parse::<Shape>().is_err());
    }
}
