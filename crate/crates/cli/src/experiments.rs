//! The named experiments.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use amplab_core::entropy::{entropy_drift, CurveArray};
use amplab_core::interpretation::{hoeffding_bound, parse_rational, FrequencyWindow, Rational, ReplicaDistribution};
use amplab_core::observables::{
    apparatus_unitary, build_observable, direct_probabilities, eigenvalues, hermiticity_gap, measure, normality_defect,
    unitarity_defect_under, ComplexDetector,
};
use amplab_core::random::{random_setup, random_setup_from, split_at_filter, SetupShape};
use amplab_core::setup::{and_compose, or_compose, Filter, Setup, SpacetimePoint};
use amplab_core::{inner_product, path_sum_amplitude, setup_amplitude, Measure, Stepper, WaveFunction, C64};
use anyhow::{anyhow, bail, ensure, Context, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{DetectorBasis, ExperimentConfig, ValueSpec};
use crate::report::{Cell, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    AlgebraCheck,
    BornSweep,
    EntropyRun,
    ObservableDemo,
    AmplitudeEval,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::AlgebraCheck,
        Experiment::BornSweep,
        Experiment::EntropyRun,
        Experiment::ObservableDemo,
        Experiment::AmplitudeEval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::AlgebraCheck => "algebra-check",
            Experiment::BornSweep => "born-sweep",
            Experiment::EntropyRun => "entropy-run",
            Experiment::ObservableDemo => "observable-demo",
            Experiment::AmplitudeEval => "amplitude-eval",
        }
    }

    /// Whether a run with `cfg` draws random numbers and therefore needs a seed.
    pub fn uses_seed(self, cfg: &ExperimentConfig) -> bool {
        cfg.uses_randomness()
            || match self {
                Experiment::AlgebraCheck => true,
                Experiment::ObservableDemo => {
                    cfg.observable.values == ValueSpec::Random || cfg.observable.shuffle_targets
                }
                _ => false,
            }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| anyhow!("unknown experiment {s:?}"))
    }
}

/// Extra inputs beyond the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Inputs<'a> {
    pub setup: Option<&'a Setup>,
}

/// Runs `exp`; inner-module failures carry the experiment name.
pub fn run_experiment(exp: Experiment, cfg: &ExperimentConfig, inputs: Inputs<'_>) -> Result<Report> {
    cfg.validate()?;
    if exp.uses_seed(cfg) {
        cfg.require_seed(exp.name())?;
    }
    let run = match exp {
        Experiment::AlgebraCheck => algebra_check(cfg),
        Experiment::BornSweep => born_sweep(cfg),
        Experiment::EntropyRun => entropy_run(cfg),
        Experiment::ObservableDemo => observable_demo(cfg),
        Experiment::AmplitudeEval => amplitude_eval(cfg, inputs),
    };
    run.with_context(|| format!("{exp} failed"))
}

struct Law {
    name: &'static str,
    tolerance: f64,
    trials: usize,
    failures: usize,
    worst: f64,
}

impl Law {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Law {
            name,
            tolerance,
            trials: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    /// One trial: structural equality and amplitude deviation.
    fn record(&mut self, holds: bool, deviation: f64) {
        self.trials += 1;
        self.worst = self.worst.max(deviation);
        if !holds || deviation.is_nan() || deviation > self.tolerance {
            self.failures += 1;
        }
    }
}

/// Random setup with a filter of at least `holes` holes, and that filter's index.
fn wide_setup(
    rng: &mut ChaCha8Rng,
    shape: &SetupShape,
    source: Option<SpacetimePoint>,
    holes: usize,
) -> (Setup, usize) {
    loop {
        let s = match source {
            Some(src) => random_setup_from(rng, shape, src),
            None => random_setup(rng, shape),
        };
        let wide: Vec<usize> = (0..s.filters().len())
            .filter(|&i| s.filters()[i].holes().len() >= holes)
            .collect();
        if !wide.is_empty() {
            let pick = wide[rng.random_range(0..wide.len())];
            return (s, pick);
        }
    }
}

fn algebra_check(cfg: &ExperimentConfig) -> Result<Report> {
    let len = cfg.lattice_size;
    ensure!(len >= 3, "needs lattice_size >= 3");
    let p = &cfg.algebra;
    let shape = SetupShape {
        len,
        max_filters: p.max_filters,
        max_holes: p.max_holes.min(len),
        max_gap: p.max_gap,
    };
    let stepper = Stepper::new(cfg.dynamics()?)?;
    let mut rng = cfg.rng("algebra-check", 1)?;
    let amp = |a: &Setup| setup_amplitude(a, &stepper).map(|x| x.value());

    let mut or_comm = Law::new("or_commutative", 1e-12);
    let mut or_assoc = Law::new("or_associative", 1e-12);
    let mut and_assoc = Law::new("and_associative", 1e-12);
    let mut distrib = Law::new("and_distributes_over_or", 1e-12);
    let mut product = Law::new("amplitude_product_rule", 1e-12);
    let mut sum = Law::new("amplitude_sum_rule", 1e-12);
    let mut full = Law::new("full_filter_is_identity", 1e-13);
    let mut oracle = Law::new("chain_matches_path_sum", 1e-11);
    let mut witness = Law::new("and_not_commutative", 0.0);

    for _ in 0..p.trials {
        let (base, idx) = wide_setup(&mut rng, &shape, None, 3);
        let parts = split_at_filter(&mut rng, &base, idx, 3).expect("filter is wide enough");
        let (a1, a2, a3) = (&parts[0], &parts[1], &parts[2]);
        let a12 = or_compose(a1, a2)?;
        let a21 = or_compose(a2, a1)?;
        or_comm.record(a12 == a21, (amp(&a12)? - amp(&a21)?).norm());
        let left = or_compose(&a12, a3)?;
        let right = or_compose(a1, &or_compose(a2, a3)?)?;
        let parts_sum = amp(a1)? + amp(a2)? + amp(a3)?;
        or_assoc.record(left == right && left == base, (amp(&left)? - amp(&right)?).norm());
        sum.record(true, (amp(&left)? - parts_sum).norm());

        let a = random_setup(&mut rng, &shape);
        let b = random_setup_from(&mut rng, &shape, a.detector());
        let c = random_setup_from(&mut rng, &shape, b.detector());
        let ab = and_compose(&a, &b)?;
        let l = and_compose(&ab, &c)?;
        let r = and_compose(&a, &and_compose(&b, &c)?)?;
        and_assoc.record(l == r, (amp(&l)? - amp(&r)?).norm());
        product.record(true, (amp(&ab)? - amp(&a)? * amp(&b)?).norm());
        product.record(true, (amp(&l)? - amp(&a)? * amp(&b)? * amp(&c)?).norm());

        let (bb, bidx) = wide_setup(&mut rng, &shape, Some(a.detector()), 2);
        let pair = split_at_filter(&mut rng, &bb, bidx, 2).expect("filter is wide enough");
        let lhs = and_compose(&a, &or_compose(&pair[0], &pair[1])?)?;
        let (l0, l1) = (and_compose(&a, &pair[0])?, and_compose(&a, &pair[1])?);
        let rhs = or_compose(&l0, &l1)?;
        distrib.record(lhs == rhs, (amp(&lhs)? - amp(&l0)? - amp(&l1)?).norm());

        let src = a.source();
        let t_f = src.time + rng.random_range(2..=2 * p.max_gap.max(1) + 1);
        let det = SpacetimePoint::new(rng.random_range(0..len), t_f);
        let bare = Setup::elementary(src, det)?;
        let covered = Setup::new(src, vec![Filter::full(rng.random_range(src.time + 1..t_f), len)], det)?;
        full.record(true, (amp(&bare)? - amp(&covered)?).norm());

        if base.path_count() <= amplab_core::amplitude::PATH_LIMIT {
            let paths = path_sum_amplitude(&base, &stepper)?.value();
            oracle.record(true, (amp(&base)? - paths).norm());
        }
    }

    let early = Setup::elementary(SpacetimePoint::new(0, 0), SpacetimePoint::new(1, 2))?;
    let late = Setup::elementary(SpacetimePoint::new(1, 2), SpacetimePoint::new(2, 5))?;
    witness.record(
        and_compose(&early, &late).is_ok() && and_compose(&late, &early).is_err(),
        0.0,
    );

    let laws = [
        or_comm, or_assoc, and_assoc, distrib, product, sum, full, oracle, witness,
    ];
    let mut table = Table::new(vec![
        "law",
        "trials",
        "failures",
        "max_amplitude_deviation",
        "tolerance",
    ]);
    for law in &laws {
        table.push(vec![
            law.name.into(),
            law.trials.into(),
            law.failures.into(),
            law.worst.into(),
            law.tolerance.into(),
        ]);
    }
    let failed: Vec<&str> = laws.iter().filter(|l| l.failures > 0).map(|l| l.name).collect();
    Ok(Report {
        experiment: "algebra-check",
        table,
        summary: json!({
            "trials": p.trials,
            "laws_checked": laws.len(),
            "failed_laws": failed,
        }),
        success: failed.is_empty(),
    })
}

fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn parse_field(field: &str, s: &str) -> Result<Rational> {
    parse_rational(s).with_context(|| format!("{field}: cannot parse {s:?}"))
}

struct SweepPoint {
    p: f64,
    replicas: u64,
    centers: Vec<Rational>,
}

struct SweepRow {
    p: f64,
    replicas: u64,
    center: f64,
    distance_sq: f64,
    bound_kind: &'static str,
    bound: f64,
}

fn born_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let b = &cfg.born;
    let eps = parse_field("born.epsilon", &b.epsilon)?;
    let explicit: Vec<Rational> = b
        .centers
        .iter()
        .map(|c| parse_field("born.centers", c))
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    for s in &b.p {
        let p = parse_field("born.p", s)?;
        ensure!(
            p >= Rational::from_integer(0) && p <= Rational::from_integer(1),
            "born.p must lie in [0, 1], got {s}"
        );
        let centers = if explicit.is_empty() { vec![p] } else { explicit.clone() };
        for c in &centers {
            FrequencyWindow::new(*c, eps).with_context(|| format!("window centered at {c} with half-width {eps}"))?;
        }
        for &replicas in &b.replicas {
            points.push(SweepPoint {
                p: rational_to_f64(p),
                replicas,
                centers: centers.clone(),
            });
        }
    }

    let eval = |pt: &SweepPoint| -> Result<Vec<SweepRow>> {
        let dist = ReplicaDistribution::new(pt.p, pt.replicas)?;
        pt.centers
            .iter()
            .map(|&c| {
                let w = FrequencyWindow::new(c, eps)?;
                let (kind, bound) = hoeffding_bound(pt.p, pt.replicas, &w);
                Ok(SweepRow {
                    p: pt.p,
                    replicas: pt.replicas,
                    center: rational_to_f64(c),
                    distance_sq: dist.distance_sq(&w),
                    bound_kind: kind.as_str(),
                    bound,
                })
            })
            .collect()
    };
    // One thread per parameter point; rows are collected back in input order.
    let results: Vec<Result<Vec<SweepRow>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = points.iter().map(|pt| scope.spawn(move || eval(pt))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let eps_f = rational_to_f64(eps);
    let mut table = Table::new(vec![
        "p",
        "replicas",
        "epsilon",
        "f",
        "distance_sq",
        "hoeffding_bound",
        "bound_kind",
    ]);
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let mut envelope_ok = true;
    for r in &rows {
        envelope_ok &= match r.bound_kind {
            "upper" => r.distance_sq <= r.bound,
            _ => r.distance_sq >= r.bound,
        };
        table.push(vec![
            r.p.into(),
            r.replicas.into(),
            eps_f.into(),
            r.center.into(),
            r.distance_sq.into(),
            r.bound.into(),
            r.bound_kind.into(),
        ]);
    }
    // Distances along increasing N for each (p, f) series.
    let mut monotone = true;
    for x in &rows {
        for y in &rows {
            if x.p == y.p && x.center == y.center && x.replicas < y.replicas {
                monotone &= match x.bound_kind {
                    "upper" => y.distance_sq <= x.distance_sq,
                    _ => y.distance_sq >= x.distance_sq,
                };
            }
        }
    }
    Ok(Report {
        experiment: "born-sweep",
        table,
        summary: json!({
            "points": points.len(),
            "rows": rows.len(),
            "epsilon": b.epsilon,
            "within_hoeffding_envelope": envelope_ok,
            "monotone_in_replicas": monotone,
        }),
        success: envelope_ok,
    })
}

/// `cos(a) e_x / sqrt(w_x) + sin(a) e_y / sqrt(w_y)` with uniform density on `[0, pi/2]`.
fn great_circle(measure: &Measure, x: usize, y: usize, samples: usize) -> Result<CurveArray> {
    let len = measure.len();
    if measure.is_flat() {
        return Ok(CurveArray::great_circle(len, x, y, samples)?);
    }
    let ex = WaveFunction::spike(len, x)?.scaled(C64::new(1.0 / measure.weight(x).sqrt(), 0.0));
    let ey = WaveFunction::spike(len, y)?.scaled(C64::new(1.0 / measure.weight(y).sqrt(), 0.0));
    let h = FRAC_PI_2 / (samples - 1) as f64;
    let alphas: Vec<f64> = (0..samples).map(|j| j as f64 * h).collect();
    let states = alphas
        .iter()
        .map(|&a| ex.combine(C64::new(a.cos(), 0.0), &ey, C64::new(a.sin(), 0.0)))
        .collect::<amplab_core::Result<Vec<_>>>()?;
    Ok(CurveArray::new(
        alphas,
        vec![1.0 / FRAC_PI_2; samples],
        states,
        measure.clone(),
    )?)
}

fn entropy_run(cfg: &ExperimentConfig) -> Result<Report> {
    let len = cfg.lattice_size;
    ensure!(len >= 2, "needs lattice_size >= 2");
    let e = &cfg.entropy;
    let [x, y] = e.sites.unwrap_or([0, len / 2]);
    let measure = cfg.measure()?;
    let curve = great_circle(&measure, x, y, e.samples)?;
    let stepper = Stepper::new(cfg.dynamics()?)?;
    let records = entropy_drift(&curve, &stepper, e.steps)?;

    let s0 = records[0].entropy;
    let mut table = Table::new(vec![
        "step",
        "time",
        "entropy",
        "entropy_drift",
        "max_length_drift",
        "max_step_drift",
        "gamma",
    ]);
    let (mut max_s, mut max_l) = (0.0f64, 0.0f64);
    for r in &records {
        max_s = max_s.max((r.entropy - s0).abs());
        max_l = max_l.max(r.max_length_drift);
        table.push(vec![
            r.step.into(),
            r.time.into(),
            r.entropy.into(),
            (r.entropy - s0).into(),
            r.max_length_drift.into(),
            r.max_step_drift.into(),
            cfg.gamma.into(),
        ]);
    }
    let last = records.last().expect("series includes step 0");
    Ok(Report {
        experiment: "entropy-run",
        table,
        summary: json!({
            "gamma": cfg.gamma,
            "steps": e.steps,
            "samples": e.samples,
            "sites": [x, y],
            "initial_entropy": s0,
            "final_entropy": last.entropy,
            "max_entropy_drift": max_s,
            "max_length_drift": max_l,
        }),
        success: true,
    })
}

/// Normalized Gaussian packet at `L/4` with momentum `pi/4`.
fn probe_state(m: &Measure) -> Result<WaveFunction> {
    let len = m.len();
    let sigma = (len as f64 / 16.0).max(1.0);
    let center = len as f64 / 4.0;
    let coeffs = (0..len)
        .map(|x| {
            let d = x as f64 - center;
            C64::from_polar((-d * d / (2.0 * sigma * sigma)).exp(), PI / 4.0 * x as f64)
        })
        .collect();
    Ok(WaveFunction::new(coeffs, 0.0)?.normalized(m)?)
}

fn detector_for(cfg: &ExperimentConfig, m: &Measure) -> Result<ComplexDetector> {
    let len = m.len();
    let p = &cfg.observable;
    let mut targets: Vec<usize> = (0..len).collect();
    let mut rng = if cfg.seed.is_some() {
        Some(cfg.rng("observable-demo", 2)?)
    } else {
        None
    };
    if p.shuffle_targets {
        targets.shuffle(rng.as_mut().ok_or_else(|| anyhow!("shuffle_targets needs a seed"))?);
    }
    let values: Vec<C64> = match p.values {
        ValueSpec::Phases => (0..len)
            .map(|n| C64::from_polar(1.0, 2.0 * PI * n as f64 / len as f64))
            .collect(),
        ValueSpec::Real => (0..len).map(|n| C64::new(n as f64, 0.0)).collect(),
        ValueSpec::Random => {
            let rng = rng.as_mut().ok_or_else(|| anyhow!("random values need a seed"))?;
            (0..len)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        }
    };
    // Basis vectors scaled so they are orthonormal under `m`.
    let basis = (0..len)
        .map(|n| {
            let coeffs = (0..len)
                .map(|x| {
                    let scale = 1.0 / m.weight(x).sqrt();
                    match p.basis {
                        DetectorBasis::Fourier => C64::from_polar(
                            scale / (len as f64).sqrt(),
                            2.0 * PI * ((n * x) % len) as f64 / len as f64,
                        ),
                        DetectorBasis::Position if x == n => C64::new(scale, 0.0),
                        DetectorBasis::Position => C64::new(0.0, 0.0),
                    }
                })
                .collect();
            WaveFunction::new(coeffs, 0.0)
        })
        .collect::<amplab_core::Result<Vec<_>>>()?;
    Ok(ComplexDetector::new(basis, targets, Some(values))?)
}

fn observable_demo(cfg: &ExperimentConfig) -> Result<Report> {
    let m = cfg.measure()?;
    let det = detector_for(cfg, &m)?;
    let psi = probe_state(&m)?;
    let orth = det.orthonormality_defect(&m)?;
    let w = apparatus_unitary(&det, &m)?;
    let q = build_observable(&det, &m)?;
    let probs = measure(&psi, &det, &m)?;
    let direct = direct_probabilities(&psi, &det, &m)?;
    let values = det.values().expect("demo detector has values");

    let spectrum = eigenvalues(&q)?;
    let spectrum_error = values
        .iter()
        .map(|f| spectrum.iter().map(|z| (z - f).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let qpsi = WaveFunction::from_vector(&q * psi.coefficients(), 0.0)?;
    let expectation = inner_product(&psi, &qpsi, &m)?;
    let weighted: C64 = probs.iter().zip(values).map(|(p, f)| f * *p).sum();

    let mut table = Table::new(vec![
        "n",
        "target",
        "f_re",
        "f_im",
        "probability_apparatus",
        "probability_overlap",
    ]);
    for n in 0..det.len() {
        table.push(vec![
            n.into(),
            det.targets()[n].into(),
            values[n].re.into(),
            values[n].im.into(),
            probs[n].into(),
            direct[n].into(),
        ]);
    }
    let route_gap = probs
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Report {
        experiment: "observable-demo",
        table,
        summary: json!({
            "orthonormality_defect": orth,
            "unitarity_defect": unitarity_defect_under(&w, &m),
            "normality_defect": normality_defect(&q, &m),
            "hermiticity_gap": hermiticity_gap(&q, &m),
            "spectrum_error": spectrum_error,
            "total_probability": probs.iter().sum::<f64>(),
            "route_gap": route_gap,
            "expectation": [expectation.re, expectation.im],
            "expectation_from_probabilities": [weighted.re, weighted.im],
        }),
        success: true,
    })
}

fn amplitude_eval(cfg: &ExperimentConfig, inputs: Inputs<'_>) -> Result<Report> {
    let Some(setup) = inputs.setup else {
        bail!("needs a setup document (--setup PATH)");
    };
    let stepper = Stepper::new(cfg.dynamics()?)?;
    let chain = setup_amplitude(setup, &stepper).context("matrix chain")?.value();
    let paths = path_sum_amplitude(setup, &stepper).context("path enumeration")?.value();
    let mut table = Table::new(vec!["method", "re", "im", "abs_sq"]);
    for (name, z) in [("matrix_chain", chain), ("path_sum", paths)] {
        table.push(vec![Cell::from(name), z.re.into(), z.im.into(), z.norm_sqr().into()]);
    }
    let deviation = (chain - paths).norm();
    Ok(Report {
        experiment: "amplitude-eval",
        table,
        summary: json!({
            "setup": setup.to_string(),
            "path_count": setup.path_count().to_string(),
            "deviation": deviation,
        }),
        success: deviation <= 1e-11,
    })
}
