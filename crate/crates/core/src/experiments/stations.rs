use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::graph::{Gso, GsoFamily};

const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: String,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
}

/// Sensor measurements on a fixed node set: `values[(i, t)]` is node `i` at
/// `timestamps[t]`.
#[derive(Debug, Clone)]
pub struct StationDataset {
    pub stations: Vec<Station>,
    pub timestamps: Vec<String>,
    pub values: Mat<f64>,
    pub exogenous: Option<Mat<f64>>,
    pub units: Option<String>,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub value_column: String,
    /// Fill gaps linearly (interior) and by nearest value (ends).
    pub interpolate: bool,
    /// Scale every node's series to unit ℓ2 norm.
    pub normalize: bool,
    /// Nodes with fewer raw measurements are dropped.
    pub min_measurements: usize,
    pub units: Option<String>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            value_column: "value".into(),
            interpolate: true,
            normalize: false,
            min_measurements: 1,
            units: None,
        }
    }
}

impl StationDataset {
    pub fn n(&self) -> usize {
        self.stations.len()
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// Reads long-format measurements.
///
/// Required columns: `timestamp`, `node_id` and `options.value_column`.
/// Optional: `latitude`, `longitude` (degrees) and `exogenous`. Timestamps are
/// ordered lexicographically, so they should be ISO-8601 and evenly spaced.
/// Empty value cells count as missing.
pub fn ingest_station_csv(path: &Path, options: &IngestOptions) -> Result<StationDataset> {
    ingest_station_reader(std::fs::File::open(path)?, options)
}

pub fn ingest_station_reader<R: Read>(input: R, options: &IngestOptions) -> Result<StationDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need =
        |name: &str| col(name).ok_or_else(|| Error::Data(format!("missing column `{name}`")));
    let (c_time, c_node, c_val) = (
        need("timestamp")?,
        need("node_id")?,
        need(&options.value_column)?,
    );
    let (c_lat, c_lon, c_exo) = (col("latitude"), col("longitude"), col("exogenous"));

    struct NodeData {
        lat: Option<f64>,
        lon: Option<f64>,
        values: BTreeMap<String, f64>,
        exo: BTreeMap<String, f64>,
    }
    let mut nodes: BTreeMap<String, NodeData> = BTreeMap::new();
    let mut times: BTreeSet<String> = BTreeSet::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |c: usize| -> Result<Option<f64>> {
            let s = rec.get(c).unwrap_or("");
            if s.is_empty() {
                return Ok(None);
            }
            let v: f64 = s
                .parse()
                .map_err(|_| Error::Data(format!("row {}: `{s}` is not a number", line + 2)))?;
            if !v.is_finite() {
                return Err(Error::Data(format!("row {}: non-finite value", line + 2)));
            }
            Ok(Some(v))
        };
        let t = rec.get(c_time).unwrap_or("").to_string();
        let id = rec.get(c_node).unwrap_or("").to_string();
        if t.is_empty() || id.is_empty() {
            return Err(Error::Data(format!(
                "row {}: empty timestamp or node_id",
                line + 2
            )));
        }
        times.insert(t.clone());
        let entry = nodes.entry(id).or_insert_with(|| NodeData {
            lat: None,
            lon: None,
            values: BTreeMap::new(),
            exo: BTreeMap::new(),
        });
        if let Some(c) = c_lat {
            entry.lat = entry.lat.or(parse(c)?);
        }
        if let Some(c) = c_lon {
            entry.lon = entry.lon.or(parse(c)?);
        }
        if let Some(v) = parse(c_val)? {
            if entry.values.insert(t.clone(), v).is_some() {
                return Err(Error::Data(format!(
                    "row {}: duplicate measurement at {t}",
                    line + 2
                )));
            }
        }
        if let Some(c) = c_exo {
            if let Some(v) = parse(c)? {
                entry.exo.insert(t, v);
            }
        }
    }
    nodes.retain(|_, d| d.values.len() >= options.min_measurements.max(1));
    if nodes.is_empty() {
        return Err(Error::Data(format!(
            "no node has at least {} measurements",
            options.min_measurements
        )));
    }
    let timestamps: Vec<String> = times.into_iter().collect();
    let (n, t_len) = (nodes.len(), timestamps.len());
    let mut values = Mat::<f64>::zeros(n, t_len);
    let has_exo = c_exo.is_some();
    let mut exogenous = has_exo.then(|| Mat::<f64>::zeros(n, t_len));
    let mut stations = Vec::with_capacity(n);
    for (i, (id, data)) in nodes.into_iter().enumerate() {
        let row = fill_row(&timestamps, &data.values, options.interpolate)
            .map_err(|e| Error::Data(format!("node {id}: {e}")))?;
        for (t, v) in row.into_iter().enumerate() {
            values[(i, t)] = v;
        }
        if let Some(x) = exogenous.as_mut() {
            // Missing inputs are treated as zero input.
            for (t, ts) in timestamps.iter().enumerate() {
                x[(i, t)] = data.exo.get(ts).copied().unwrap_or(0.0);
            }
        }
        stations.push(Station {
            id,
            latitude: data.lat,
            longitude: data.lon,
        });
    }
    if options.normalize {
        for i in 0..n {
            let norm = (0..t_len)
                .map(|t| values[(i, t)].powi(2))
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                return Err(Error::Data(format!(
                    "series of node {} is identically zero",
                    stations[i].id
                )));
            }
            for t in 0..t_len {
                values[(i, t)] /= norm;
            }
        }
    }
    Ok(StationDataset {
        stations,
        timestamps,
        values,
        exogenous,
        units: options.units.clone(),
    })
}

fn fill_row(
    timestamps: &[String],
    known: &BTreeMap<String, f64>,
    interpolate: bool,
) -> std::result::Result<Vec<f64>, String> {
    let raw: Vec<Option<f64>> = timestamps.iter().map(|t| known.get(t).copied()).collect();
    if !interpolate {
        return raw
            .iter()
            .map(|v| v.ok_or_else(|| "missing values and interpolation is off".to_string()))
            .collect();
    }
    Ok(fill_gaps(&raw))
}

/// Linear interpolation between known samples; leading and trailing gaps take
/// the nearest known value. Requires at least one known sample.
pub fn fill_gaps(raw: &[Option<f64>]) -> Vec<f64> {
    let known: Vec<usize> = (0..raw.len()).filter(|&t| raw[t].is_some()).collect();
    assert!(
        !known.is_empty(),
        "fill_gaps needs at least one known sample"
    );
    let mut out = vec![0.0; raw.len()];
    let (first, last) = (known[0], known[known.len() - 1]);
    for t in 0..raw.len() {
        out[t] = match raw[t] {
            Some(v) => v,
            None if t < first => raw[first].unwrap(),
            None if t > last => raw[last].unwrap(),
            None => {
                let hi = known.partition_point(|&k| k < t);
                let (a, b) = (known[hi - 1], known[hi]);
                let (va, vb) = (raw[a].unwrap(), raw[b].unwrap());
                va + (vb - va) * (t - a) as f64 / (b - a) as f64
            }
        };
    }
    out
}

/// Great-circle distance in kilometres.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Unweighted k-nearest-neighbour graph under great-circle distance,
/// symmetrized by union. Ties go to the lower node index.
pub fn knn_graph(stations: &[Station], k: usize) -> Result<Gso> {
    let n = stations.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must satisfy 1 <= k < {n}"
        )));
    }
    let coords: Vec<(f64, f64)> = stations
        .iter()
        .map(|s| match (s.latitude, s.longitude) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Data(format!("station {} has no coordinates", s.id))),
        })
        .collect::<Result<_>>()?;
    let mut a = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                (
                    haversine_km(coords[i].0, coords[i].1, coords[j].0, coords[j].1),
                    j,
                )
            })
            .collect();
        others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, j) in others.iter().take(k) {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
    }
    Gso::new(a, GsoFamily::Adjacency, true)
}
