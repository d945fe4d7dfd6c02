use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// One long-format result: `method,grid_value,seed,metric,value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub grid_value: f64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

/// Wall-clock time of one method on one realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub method: String,
    pub grid_value: f64,
    pub seed: u64,
    pub wall_ms: f64,
}

/// Median of one `(method, grid_value, metric)` group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub grid_value: f64,
    pub metric: String,
    pub median: f64,
    pub count: usize,
}

/// Median of a sample; NaN for an empty one.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Groups preserve first-appearance order of methods and metrics and sort grid values.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut method_rank: BTreeMap<&str, usize> = BTreeMap::new();
    let mut metric_rank: BTreeMap<&str, usize> = BTreeMap::new();
    for r in rows {
        let n = method_rank.len();
        method_rank.entry(&r.method).or_insert(n);
        let n = metric_rank.len();
        metric_rank.entry(&r.metric).or_insert(n);
    }
    let mut groups: BTreeMap<(usize, u64, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        // total_cmp order of non-negative floats matches their bit order
        let key = (
            method_rank[r.method.as_str()],
            r.grid_value.to_bits(),
            metric_rank[r.metric.as_str()],
        );
        groups.entry(key).or_default().push(r.value);
    }
    let methods: Vec<&str> = invert(&method_rank);
    let metrics: Vec<&str> = invert(&metric_rank);
    groups
        .into_iter()
        .map(|((m, g, k), vals)| SummaryRow {
            method: methods[m].to_string(),
            grid_value: f64::from_bits(g),
            metric: metrics[k].to_string(),
            median: median(&vals),
            count: vals.len(),
        })
        .collect()
}

fn invert<'a>(rank: &BTreeMap<&'a str, usize>) -> Vec<&'a str> {
    let mut out = vec![""; rank.len()];
    for (&name, &i) in rank {
        out[i] = name;
    }
    out
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv`, `summary.csv` and `timings.csv` into `dir`.
pub fn write_outputs(dir: &Path, results: &[ResultRow], timings: &[TimingRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_rows(results, std::fs::File::create(dir.join("results.csv"))?)?;
    write_rows(
        &summarize(results),
        std::fs::File::create(dir.join("summary.csv"))?,
    )?;
    write_rows(timings, std::fs::File::create(dir.join("timings.csv"))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, g: f64, seed: u64, value: f64) -> ResultRow {
        ResultRow {
            method: method.into(),
            grid_value: g,
            seed,
            metric: "nerr_H".into(),
            value,
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn summary_groups_and_orders() {
        let rows = vec![
            row("RFI", 3.0, 0, 1.0),
            row("FI", 2.0, 0, 5.0),
            row("RFI", 2.0, 0, 2.0),
            row("RFI", 2.0, 1, 4.0),
        ];
        let s = summarize(&rows);
        let keys: Vec<(&str, f64, f64, usize)> = s
            .iter()
            .map(|r| (r.method.as_str(), r.grid_value, r.median, r.count))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("RFI", 2.0, 3.0, 2),
                ("RFI", 3.0, 1.0, 1),
                ("FI", 2.0, 5.0, 1)
            ]
        );
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_rows(&[row("FI", 2.0, 7, 0.25)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "method,grid_value,seed,metric,value\nFI,2.0,7,nerr_H,0.25\n"
        );
    }
}
