//! Seeded synthetic generators and CSV ingestion.

use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::causal::{AnmModel, Dag};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::sample::{ComponentSample, MultiSample};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `M` mutually independent standard-normal blocks of dimension `d`.
    IndepGaussians { m: usize, d: usize },
    /// `X₁ ~ N(0,1)`, `X₂ = X₁ + noise_sd · ε`, `ε ~ N(0,1)`.
    LinearDependent { noise_sd: f64 },
    /// Additive noise model on `dag` with structural functions drawn from `f_seed`.
    AnmDag { dag: Dag, f_seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        GeneratorSpec { kind, n, seed }
    }
}

pub(crate) fn normals(rng: &mut Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| StandardNormal.sample(rng)).collect()
}

/// Draws a sample; identical output for identical specs.
pub fn generate(spec: &GeneratorSpec) -> Result<MultiSample> {
    if spec.n == 0 {
        return Err(Error::invalid("generator needs n >= 1"));
    }
    let mut rng = rng_from_seed(spec.seed);
    match &spec.kind {
        GeneratorKind::IndepGaussians { m, d } => {
            if *m == 0 || *d == 0 {
                return Err(Error::invalid("IndepGaussians needs M >= 1 and d >= 1"));
            }
            let comps = (0..*m)
                .map(|_| ComponentSample::new(spec.n, *d, normals(&mut rng, spec.n * d)))
                .collect::<Result<Vec<_>>>()?;
            MultiSample::new(comps)
        }
        GeneratorKind::LinearDependent { noise_sd } => {
            if !(*noise_sd >= 0.0 && noise_sd.is_finite()) {
                return Err(Error::invalid("noise_sd must be finite and non-negative"));
            }
            let x1 = normals(&mut rng, spec.n);
            let eps = normals(&mut rng, spec.n);
            let x2: Vec<f64> = x1.iter().zip(&eps).map(|(x, e)| x + noise_sd * e).collect();
            MultiSample::from_columns(&[x1, x2])
        }
        GeneratorKind::AnmDag { dag, f_seed } => AnmModel::random(dag.clone(), *f_seed)?.sample(spec.n, spec.seed),
    }
}

/// Which component each CSV column feeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRoles {
    /// Column `c` becomes scalar component `c`.
    OnePerColumn,
    /// `roles[c] = Some(m)` routes column `c` to component `m`; `None` drops it.
    Explicit(Vec<Option<usize>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub column_roles: ColumnRoles,
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            column_roles: ColumnRoles::OnePerColumn,
            has_header: false,
            delimiter: b',',
        }
    }
}

impl CsvSchema {
    fn roles_for(&self, ncols: usize) -> Result<Vec<Option<usize>>> {
        let roles = match &self.column_roles {
            ColumnRoles::OnePerColumn => (0..ncols).map(Some).collect(),
            ColumnRoles::Explicit(r) => {
                if r.len() != ncols {
                    return Err(Error::invalid(format!(
                        "schema assigns roles to {} columns but the file has {ncols}",
                        r.len()
                    )));
                }
                r.clone()
            }
        };
        let m = roles.iter().flatten().max().map_or(0, |&x| x + 1);
        if m == 0 {
            return Err(Error::invalid("schema uses no columns"));
        }
        for c in 0..m {
            if !roles.contains(&Some(c)) {
                return Err(Error::invalid(format!("component {} receives no column", c + 1)));
            }
        }
        Ok(roles)
    }
}

/// Reads a delimited file into a sample, one joint observation per row.
/// Errors carry 1-based line and column numbers.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<MultiSample> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: &CsvSchema) -> Result<MultiSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .delimiter(schema.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut ncols = None;
    let mut roles = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let expected = match ncols {
            Some(c) => c,
            None => {
                roles = schema.roles_for(record.len())?;
                *ncols.insert(record.len())
            }
        };
        if record.len() != expected {
            return Err(Error::Parse {
                row: line,
                column: record.len().min(expected) + 1,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if roles[c].is_none() {
                    return Ok(0.0);
                }
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row: line,
                        column: c + 1,
                        message: format!("not a finite number: {cell:?}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let ncols = ncols.ok_or_else(|| Error::invalid("CSV contains no data rows"))?;
    let m = roles.iter().flatten().max().map_or(0, |&x| x + 1);
    let n = rows.len();
    let mut comps = Vec::with_capacity(m);
    for comp in 0..m {
        let cols: Vec<usize> = (0..ncols).filter(|&c| roles[c] == Some(comp)).collect();
        let mut values = Vec::with_capacity(n * cols.len());
        for row in &rows {
            values.extend(cols.iter().map(|&c| row[c]));
        }
        comps.push(ComponentSample::new(n, cols.len(), values)?);
    }
    MultiSample::new(comps)
}

/// `n_out` joint rows drawn uniformly without replacement.
pub fn subsample(sample: &MultiSample, n_out: usize, seed: u64) -> Result<MultiSample> {
    if n_out == 0 || n_out > sample.n() {
        return Err(Error::invalid(format!(
            "subsample size must be in 1..={} (got {n_out})",
            sample.n()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let idx = sample_indices(&mut rng, sample.n(), n_out).into_vec();
    Ok(sample.select_rows(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indep_gaussians_reproducible() {
        let spec = GeneratorSpec::new(GeneratorKind::IndepGaussians { m: 2, d: 1 }, 5, 11);
        let a = generate(&spec).unwrap();
        assert_eq!(a.num_components(), 2);
        assert_eq!(a.n(), 5);
        assert_eq!(a, generate(&spec).unwrap());
        assert_ne!(a.component(0), a.component(1));
    }

    #[test]
    fn zero_noise_copies_first_component() {
        let spec = GeneratorSpec::new(GeneratorKind::LinearDependent { noise_sd: 0.0 }, 50, 3);
        let s = generate(&spec).unwrap();
        assert_eq!(s.component(0).values(), s.component(1).values());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&GeneratorSpec::new(GeneratorKind::IndepGaussians { m: 2, d: 1 }, 0, 1)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::LinearDependent { noise_sd: -1.0 }, 5, 1)).is_err());
    }

    #[test]
    fn csv_one_column_per_component() {
        let s = read_csv("0,0\n1,1\n2,2\n".as_bytes(), &CsvSchema::default()).unwrap();
        assert_eq!((s.num_components(), s.n()), (2, 3));
        assert_eq!(s.component(1).values(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn csv_header_and_grouping() {
        let schema = CsvSchema {
            column_roles: ColumnRoles::Explicit(vec![Some(0), None, Some(1), Some(0)]),
            has_header: true,
            delimiter: b';',
        };
        let s = read_csv("a;skip;b;c\n1;x;2;3\n4;y;5;6\n".as_bytes(), &schema).unwrap();
        assert_eq!(s.num_components(), 2);
        assert_eq!(s.component(0).d(), 2);
        assert_eq!(s.component(0).row(1), &[4.0, 6.0]);
        assert_eq!(s.component(1).values(), &[2.0, 5.0]);
    }

    #[test]
    fn csv_errors_locate_cells() {
        match read_csv("1,2\n3,abc\n".as_bytes(), &CsvSchema::default()) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_csv("1,2\n3\n".as_bytes(), &CsvSchema::default()),
            Err(Error::Parse { row: 2, .. })
        ));
        let missing = CsvSchema {
            column_roles: ColumnRoles::Explicit(vec![Some(0), Some(2)]),
            ..CsvSchema::default()
        };
        assert!(read_csv("1,2\n".as_bytes(), &missing).is_err());
        assert!(matches!(load_csv("/nonexistent/file.csv", &CsvSchema::default()), Err(Error::Io(_))));
    }

    #[test]
    fn subsample_properties() {
        let s = MultiSample::from_columns(&[vec![0.0, 1.0, 2.0, 3.0], vec![10.0, 11.0, 12.0, 13.0]]).unwrap();
        let full = subsample(&s, 4, 9).unwrap();
        let mut firsts: Vec<f64> = full.component(0).values().to_vec();
        firsts.sort_by(f64::total_cmp);
        assert_eq!(firsts, vec![0.0, 1.0, 2.0, 3.0]);
        for i in 0..4 {
            assert_eq!(full.component(1).row(i)[0], full.component(0).row(i)[0] + 10.0);
        }
        assert_eq!(subsample(&s, 1, 9).unwrap().n(), 1);
        assert_eq!(subsample(&s, 3, 9).unwrap(), subsample(&s, 3, 9).unwrap());
        assert!(subsample(&s, 5, 9).is_err());
    }
}
