use std::time::Instant;

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{
    ExperimentConfig, ExperimentId, FilterModel, GraphModel, GraphParams, Method, SweepVariable,
};
use super::forecast::{forecast_experiment, synthesize_ar_process, ArProcessSpec, ForecastSpec};
use super::output::{ResultRow, TimingRow};
use crate::efficient::{efficient_rfi, EfficientConfig};
use crate::error::{Error, Result};
use crate::graph::{
    build_filter, generate_er, generate_small_world, nerr, nerr_vec, perturb, synthesize_signals,
    GraphFilter, Gso, InputDist, PerturbationKind, PerturbationSpec,
};
use crate::joint::{joint_rfi, MultiSignalSet};
use crate::linalg::{scale, spectral_norm};
use crate::solver::{
    fi_filter, rfi_alternating, rfi_alternating_stationary, RfiResult, SolverConfig,
    StationaryInputs,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Use `fast_realizations`.
    pub fast: bool,
    /// Overrides `base_seed`.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub results: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
}

/// Runs every grid point over seeded realizations `base_seed + r`.
///
/// Realizations run in parallel; rows come out ordered by grid point, then
/// seed, so the output does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentOutput> {
    config.validate()?;
    let base = options.seed.unwrap_or(config.base_seed);
    let seeds: Vec<u64> = (0..config.realization_count(options.fast) as u64)
        .map(|r| base + r)
        .collect();
    let mut out = ExperimentOutput::default();
    for &value in &config.sweep.values {
        let point = at_grid_point(config, value);
        let parts: Vec<Result<ExperimentOutput>> = seeds
            .par_iter()
            .map(|&seed| realization(&point, value, seed))
            .collect();
        for part in parts {
            let part = part?;
            out.results.extend(part.results);
            out.timings.extend(part.timings);
        }
    }
    Ok(out)
}

/// Copy of the config with the swept quantity set to `value`.
pub fn at_grid_point(config: &ExperimentConfig, value: f64) -> ExperimentConfig {
    let mut c = config.clone();
    let v = value as usize;
    match c.sweep.variable {
        SweepVariable::FilterOrder => c.signals.filter_order = v,
        SweepVariable::Ratio => c.perturbation.ratio = value,
        SweepVariable::Nodes => c.graph.n = v,
        SweepVariable::Signals => c.signals.m = v,
        SweepVariable::NoisePower => c.signals.eta = value,
        SweepVariable::Filters => c.signals.filters = v,
        SweepVariable::ArOrder => c.ar.order = v,
        SweepVariable::Horizon => c.ar.horizon = v,
        SweepVariable::Tts => c.ar.tts = value,
    }
    if c.solver.filter_order.is_none() {
        c.solver.filter_order = Some(c.signals.filter_order);
    }
    c
}

/// Independent RNG stream `stream` of realization `seed`.
fn stream(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(stream)
}

fn realization(c: &ExperimentConfig, grid_value: f64, seed: u64) -> Result<ExperimentOutput> {
    let mut rec = Recorder {
        grid_value,
        seed,
        out: ExperimentOutput::default(),
    };
    let g = make_graph(&c.graph, stream(seed, 1))?;
    match c.id {
        ExperimentId::FilterOrder
        | ExperimentId::PerturbationType
        | ExperimentId::BaselineCompare
        | ExperimentId::Efficiency => single_filter(c, &g, seed, &mut rec)?,
        ExperimentId::JointK => joint(c, &g, seed, &mut rec)?,
        ExperimentId::ArForecast => ar_forecast(c, &g, seed, &mut rec)?,
    }
    Ok(rec.out)
}

struct Recorder {
    grid_value: f64,
    seed: u64,
    out: ExperimentOutput,
}

impl Recorder {
    fn value(&mut self, method: &str, metric: &str, value: f64) {
        self.out.results.push(ResultRow {
            method: method.to_string(),
            grid_value: self.grid_value,
            seed: self.seed,
            metric: metric.to_string(),
            value,
        });
    }

    fn time(&mut self, method: &str, started: Instant) {
        self.out.timings.push(TimingRow {
            method: method.to_string(),
            grid_value: self.grid_value,
            seed: self.seed,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
}

pub fn make_graph(p: &GraphParams, seed: u64) -> Result<Gso> {
    match p.model {
        GraphModel::ErdosRenyi => generate_er(p.n, p.p, p.symmetric, seed),
        GraphModel::SmallWorld => generate_small_world(p.n, p.neighbors, p.rewire, seed),
    }
}

/// A true filter: its matrix and, for polynomial filters, its coefficients.
pub fn make_filter(
    gso: &Gso,
    model: FilterModel,
    order: usize,
    seed: u64,
) -> Result<(Mat<f64>, Option<Vec<f64>>)> {
    match model {
        FilterModel::Polynomial => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h: Vec<f64> = (0..order.min(gso.n()))
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            // Unit spectral norm keeps the data fit on the scale of the graph penalties.
            let raw = build_filter(gso, &h)?;
            let norm = spectral_norm(raw.matrix().expect("built filters carry a matrix"))?;
            if norm == 0.0 {
                return Err(Error::ZeroNorm);
            }
            let h: Vec<f64> = h.iter().map(|c| c / norm).collect();
            let f = build_filter(gso, &h)?;
            Ok((
                f.matrix().expect("built filters carry a matrix").to_owned(),
                Some(h),
            ))
        }
        FilterModel::Sem => {
            let n = gso.n();
            let norm = spectral_norm(gso.matrix())?;
            let a = if norm > 0.0 {
                scale(gso.matrix(), 0.5 / norm)
            } else {
                Mat::zeros(n, n)
            };
            let i_minus_a = Mat::<f64>::identity(n, n) - &a;
            Ok((i_minus_a.partial_piv_lu().inverse(), None))
        }
    }
}

fn perturbation_label(c: &ExperimentConfig, method: &str, kind: PerturbationKind) -> String {
    if c.perturbation.kinds.len() > 1 {
        format!("{method}/{}", kind.label())
    } else {
        method.to_string()
    }
}

/// Covariance normalized to unit spectral norm so that the stationarity
/// weights do not depend on the filter's gain.
/// Rescales a matrix to unit spectral norm; the zero matrix is returned unchanged.
pub fn unit_spectral(c: Mat<f64>) -> Result<Mat<f64>> {
    let s = spectral_norm(c.as_ref())?;
    Ok(if s > 0.0 {
        scale(c.as_ref(), 1.0 / s)
    } else {
        c
    })
}

fn single_filter(c: &ExperimentConfig, g: &Gso, seed: u64, rec: &mut Recorder) -> Result<()> {
    let r = c.signals.filter_order;
    let (h_true, coeffs) = make_filter(g, c.signals.filter_model, r, stream(seed, 3))?;
    let sig = synthesize_signals(
        &GraphFilter::from_matrix(h_true.clone()),
        c.signals.m,
        c.signals.eta,
        InputDist::GaussianWhite,
        stream(seed, 4),
    )?;
    let (x, y) = (sig.x.as_ref(), sig.y.as_ref());
    for &kind in &c.perturbation.kinds {
        let spec = PerturbationSpec {
            kind,
            ratio: c.perturbation.ratio,
            weight_sigma: c.perturbation.weight_sigma,
            seed: stream(seed, 2),
        };
        let s_bar = perturb(g, &spec)?;
        rec.value(
            &perturbation_label(c, "Sbar", kind),
            "nerr_S",
            nerr(s_bar.matrix(), g.matrix())?,
        );
        for &method in &c.methods {
            let label = perturbation_label(c, method.label(), kind);
            let started = Instant::now();
            if method == Method::Fi {
                let (f, fit) = fi_filter(x, y, &s_bar, r.min(g.n()))?;
                rec.time(&label, started);
                rec.value(
                    &label,
                    "nerr_H",
                    nerr(f.matrix().expect("materialized"), h_true.as_ref())?,
                );
                if let Some(h) = &coeffs {
                    rec.value(&label, "nerr_h", nerr_vec(&fit.coeffs, h)?);
                }
                continue;
            }
            let res = robust(method, c, x, y, &s_bar, &h_true)?;
            rec.time(&label, started);
            rec.value(&label, "nerr_H", nerr(res.h_hat(), h_true.as_ref())?);
            rec.value(&label, "nerr_S", nerr(res.s_hat.matrix(), g.matrix())?);
            if let (Some(h), Some(fit)) = (&coeffs, &res.h_coeffs) {
                rec.value(&label, "nerr_h", nerr_vec(&fit.coeffs, h)?);
            }
        }
    }
    Ok(())
}

fn robust(
    method: Method,
    c: &ExperimentConfig,
    x: faer::MatRef<'_, f64>,
    y: faer::MatRef<'_, f64>,
    s_bar: &Gso,
    h_true: &Mat<f64>,
) -> Result<RfiResult> {
    let solver = &c.solver;
    match method {
        Method::Rfi => rfi_alternating(x, y, s_bar, solver),
        Method::RfiL1 => rfi_alternating(
            x,
            y,
            s_bar,
            // Frozen unit weights. The reweighted solver starts at S = S̄ with distance
            // weights 1/δ1, so λ/δ1 gives both the same first graph step on that term.
            &SolverConfig {
                reweight: false,
                lambda: solver.lambda / solver.delta1,
                ..solver.clone()
            },
        ),
        Method::RfiSt => {
            // White unit-variance inputs: C_x = I and C_y = H Hᵀ up to a multiple of I.
            let cy = unit_spectral(h_true * h_true.transpose())?;
            rfi_alternating_stationary(x, y, s_bar, solver, &StationaryInputs { cx: None, cy })
        }
        Method::RfiStSample => {
            let sample = StationaryInputs::sample(x, y)?;
            let cov = StationaryInputs {
                cx: sample.cx.map(unit_spectral).transpose()?,
                cy: unit_spectral(sample.cy)?,
            };
            let solver = SolverConfig {
                rho_x: c.stationary_sample.rho_x,
                rho_y: c.stationary_sample.rho_y,
                ..solver.clone()
            };
            rfi_alternating_stationary(x, y, s_bar, &solver, &cov)
        }
        Method::EffRfi => {
            let cfg = EfficientConfig {
                tau1: c.efficient.tau1,
                tau2: c.efficient.tau2,
                solver: solver.clone(),
                ..EfficientConfig::default()
            };
            efficient_rfi(x, y, s_bar, &cfg)
        }
        other => Err(Error::Config(format!(
            "method {} is not a single-filter estimator",
            other.label()
        ))),
    }
}

fn joint(c: &ExperimentConfig, g: &Gso, seed: u64, rec: &mut Recorder) -> Result<()> {
    let k = c.signals.filters;
    let r = c.signals.filter_order;
    let mut truths = Vec::with_capacity(k);
    let mut pairs = Vec::with_capacity(k);
    for f in 0..k as u64 {
        let (h, _) = make_filter(g, c.signals.filter_model, r, stream(seed, 100 + f))?;
        let sig = synthesize_signals(
            &GraphFilter::from_matrix(h.clone()),
            c.signals.m,
            c.signals.eta,
            InputDist::GaussianWhite,
            stream(seed, 200 + f),
        )?;
        truths.push(h);
        pairs.push((sig.x, sig.y));
    }
    let spec = PerturbationSpec {
        kind: c.perturbation.kinds[0],
        ratio: c.perturbation.ratio,
        weight_sigma: c.perturbation.weight_sigma,
        seed: stream(seed, 2),
    };
    let s_bar = perturb(g, &spec)?;
    rec.value("Sbar", "nerr_S", nerr(s_bar.matrix(), g.matrix())?);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    for &method in &c.methods {
        let started = Instant::now();
        let (errs_h, errs_s): (Vec<f64>, Vec<f64>) = match method {
            Method::Fi => {
                let mut eh = Vec::with_capacity(k);
                for ((x, y), h) in pairs.iter().zip(&truths) {
                    let (f, _) = fi_filter(x.as_ref(), y.as_ref(), &s_bar, r.min(g.n()))?;
                    eh.push(nerr(f.matrix().expect("materialized"), h.as_ref())?);
                }
                (eh, Vec::new())
            }
            Method::Rfi => {
                let mut eh = Vec::with_capacity(k);
                let mut es = Vec::with_capacity(k);
                for ((x, y), h) in pairs.iter().zip(&truths) {
                    let res = rfi_alternating(x.as_ref(), y.as_ref(), &s_bar, &c.solver)?;
                    eh.push(nerr(res.h_hat(), h.as_ref())?);
                    es.push(nerr(res.s_hat.matrix(), g.matrix())?);
                }
                (eh, es)
            }
            Method::RfiJ => {
                let res = joint_rfi(&MultiSignalSet::new(pairs.clone()), &s_bar, &c.solver)?;
                let eh = res
                    .filters
                    .iter()
                    .zip(&truths)
                    .map(|(e, h)| nerr(e.as_ref(), h.as_ref()))
                    .collect::<Result<Vec<_>>>()?;
                (eh, vec![nerr(res.s_hat.matrix(), g.matrix())?])
            }
            other => {
                return Err(Error::Config(format!(
                    "method {} is not a joint estimator",
                    other.label()
                )))
            }
        };
        rec.time(method.label(), started);
        rec.value(method.label(), "nerr_H", mean(&errs_h));
        if !errs_s.is_empty() {
            rec.value(method.label(), "nerr_S", mean(&errs_s));
        }
    }
    Ok(())
}

fn ar_forecast(c: &ExperimentConfig, g: &Gso, seed: u64, rec: &mut Recorder) -> Result<()> {
    let process = ArProcessSpec {
        order: c.ar.true_order,
        filter_order: c.signals.filter_order,
        length: c.ar.length,
        burn_in: c.ar.burn_in,
        stability: c.ar.stability,
        innovation_std: c.ar.innovation_std,
    };
    let data = synthesize_ar_process(g, &process, stream(seed, 5))?;
    let spec = PerturbationSpec {
        kind: c.perturbation.kinds[0],
        ratio: c.perturbation.ratio,
        weight_sigma: c.perturbation.weight_sigma,
        seed: stream(seed, 2),
    };
    let s_bar = perturb(g, &spec)?;
    let fspec = ForecastSpec {
        order: c.ar.order,
        tts: c.ar.tts,
        horizon: c.ar.horizon,
        lsgf_order: c.ar.lsgf_order,
        methods: c.methods.clone(),
        solver: c.solver.clone(),
    };
    for o in forecast_experiment(data.series.as_ref(), None, &s_bar, &fspec)? {
        let label = o.method.label();
        rec.out.timings.push(TimingRow {
            method: label.into(),
            grid_value: rec.grid_value,
            seed: rec.seed,
            wall_ms: o.wall_ms,
        });
        rec.value(label, "nerr_y", o.nerr);
        rec.value(label, "sse", o.sse);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(id: &str, methods: &str, variable: &str, values: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(&format!(
            "id = \"{id}\"\nmethods = [{methods}]\nrealizations = 2\n[sweep]\nvariable = \"{variable}\"\nvalues = [{values}]\n\
             [graph]\nn = 8\np = 0.4\n[signals]\nm = 20\nfilter_order = 3\n[solver]\nt_max = 3\n[ar]\nlength = 40\nburn_in = 20\norder = 2\ntrue_order = 2\n"
        ))
        .unwrap()
    }

    #[test]
    fn rows_are_ordered_and_reproducible() {
        let c = tiny("filter_order", "\"FI\", \"RFI\"", "filter_order", "2, 3");
        let a = run_experiment(&c, RunOptions::default()).unwrap();
        let b = run_experiment(&c, RunOptions::default()).unwrap();
        assert_eq!(a.results, b.results);
        let keys: Vec<(f64, u64)> = a.results.iter().map(|r| (r.grid_value, r.seed)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        assert_eq!(keys, sorted);
        assert!(a.results.iter().any(|r| r.method == "Sbar"));
    }

    #[test]
    fn seed_override_shifts_realizations() {
        let c = tiny("filter_order", "\"FI\"", "filter_order", "2");
        let out = run_experiment(
            &c,
            RunOptions {
                seed: Some(40),
                fast: false,
            },
        )
        .unwrap();
        let seeds: Vec<u64> = out.results.iter().map(|r| r.seed).collect();
        assert!(seeds.iter().all(|s| *s == 40 || *s == 41));
    }

    #[test]
    fn joint_and_ar_pipelines_run() {
        let j = tiny("joint_k", "\"RFI\", \"RFI-J\"", "filters", "1, 2");
        assert!(!run_experiment(&j, RunOptions::default())
            .unwrap()
            .results
            .is_empty());
        let a = tiny(
            "ar_forecast",
            "\"LS\", \"Copy-Prev-Day\", \"AR-RFI\"",
            "horizon",
            "1, 2",
        );
        let out = run_experiment(&a, RunOptions::default()).unwrap();
        assert!(out.results.iter().any(|r| r.metric == "nerr_y"));
    }

    #[test]
    fn kind_labels_when_several() {
        let mut c = tiny("perturbation_type", "\"RFI\"", "ratio", "0.1");
        c.perturbation.kinds = vec![PerturbationKind::Create, PerturbationKind::Destroy];
        let out = run_experiment(&c, RunOptions::default()).unwrap();
        assert!(out.results.iter().any(|r| r.method == "RFI/D"));
        assert!(out.results.iter().any(|r| r.method == "Sbar/C"));
    }

    #[test]
    fn sem_filter_is_resolvent() {
        let g = generate_er(6, 0.5, true, 3).unwrap();
        let (h, coeffs) = make_filter(&g, FilterModel::Sem, 3, 0).unwrap();
        assert!(coeffs.is_none());
        let a = scale(g.matrix(), 0.5 / spectral_norm(g.matrix()).unwrap());
        let check = (Mat::<f64>::identity(6, 6) - &a) * &h;
        assert!(crate::linalg::frob((check - Mat::<f64>::identity(6, 6)).as_ref()) < 1e-12);
    }
}
