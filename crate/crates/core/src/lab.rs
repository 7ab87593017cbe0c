//! Experiment drivers: each one fans independent trials out over a thread
//! pool with per-trial seeds and returns a serializable report.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boltzmann::{count_triangulations, enumerate_all, fill, CountSink};
use crate::error::{Error, Result};
use crate::params::{KappaInput, PeelParams};
use crate::peeling::{
    rejection_sample_xi, run_algorithm, run_layers, sweep_layers, write_hull_csv, EdgeSelector, HullSeries, LayersSelector,
    NearestSelector, UniformSelector,
};
use crate::seed::{sub_seed, trial_rng, trial_seed};
use crate::stats::{chi_square_two_sample, t_interval, tally, wilson, ChiSquare, Estimate};
use crate::walk::{estimate_inv_degree, intersection_experiment, speed_experiment, stationarity_test, BallView};

/// Confidence level used in reports.
pub const LEVEL: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Exactly one of κ (as text, fractions allowed) or α.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParamText {
    Kappa(String),
    Alpha(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ParamText,
    pub seed: u64,
    pub steps: Option<u64>,
    pub radius: Option<u32>,
    pub trials: Option<u64>,
    pub budget_vertices: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub experiment: Option<String>,
}

impl ExperimentConfig {
    pub fn new(params: ParamText) -> Self {
        ExperimentConfig {
            params,
            seed: 0,
            steps: None,
            radius: None,
            trials: None,
            budget_vertices: crate::peeling::DEFAULT_VERTEX_BUDGET,
            out: None,
            format: Format::Json,
            experiment: None,
        }
    }

    pub fn build_params(&self) -> Result<PeelParams> {
        if self.budget_vertices == 0 {
            return Err(Error::Domain("vertex budget must be positive".into()));
        }
        match &self.params {
            ParamText::Kappa(s) => PeelParams::from_kappa_input(&KappaInput::parse(s)?),
            ParamText::Alpha(a) => PeelParams::from_alpha(*a),
        }
    }
}

fn header(p: &PeelParams, cfg: &ExperimentConfig) -> Value {
    json!({
        "kappa": p.kappa,
        "alpha": p.alpha,
        "params_digest": p.digest(),
        "master_seed": cfg.seed,
    })
}

/// Constants, table heads and identity residuals.
pub fn cmd_constants(cfg: &ExperimentConfig) -> Result<Value> {
    let p = cfg.build_params()?;
    let head = 10;
    let q_head: Vec<f64> = (1..=head).map(|k| p.q_neg(k)).collect();
    let c_head: Vec<f64> = (2..head + 2).map(|k| p.c_tilde(k)).collect::<Result<_>>()?;
    let z_head: Vec<f64> = (2..head + 2).map(|k| p.z(k)).collect();
    let harm = (2..=200.min(p.tolerances.p_max - 1)).map(|k| p.harmonicity_residual(k)).collect::<Result<Vec<_>>>()?;
    let split = (2..=10).map(|k| p.split_identity_residual(k)).fold(0.0, f64::max);
    let mut v = header(&p, cfg);
    let o = v.as_object_mut().unwrap();
    o.insert("beta".into(), json!(p.beta));
    o.insert("drift".into(), json!(p.drift));
    o.insert("q_1".into(), json!(p.q_1));
    o.insert("q_neg_head".into(), json!(q_head));
    o.insert("c_tilde_head".into(), json!(c_head));
    o.insert("c_tilde_limit".into(), if p.is_critical() { Value::Null } else { json!(p.c_tilde_limit()) });
    o.insert("c_tilde_last".into(), json!(p.c_tilde[p.c_tilde.len() - 1]));
    o.insert("z_head".into(), json!(z_head));
    o.insert(
        "residuals".into(),
        json!({
            "normalization": p.normalization_residual(),
            "drift": p.drift_residual(),
            "harmonicity_max_p200": harm.iter().cloned().fold(0.0, f64::max),
            "split_identity_max_p10": split,
        }),
    );
    o.insert("tolerances".into(), serde_json::to_value(&p.tolerances)?);
    o.insert("limits".into(), json!({
        "volume_drift": p.volume_drift(),
        "layer_time_ratio": p.layer_time_ratio(),
        "hull_growth": p.hull_growth(),
        "hull_volume_ratio": p.hull_volume_ratio(),
    }));
    Ok(v)
}

/// Layered peeling to `radius`; writes the map and its hull series.
///
/// The map goes to `out` (binary map format) and the hull series to
/// `out.hull.csv` or `out.hull.json`. Returns the report and whether the run
/// was truncated by the budget.
pub fn cmd_sample_map(cfg: &ExperimentConfig) -> Result<(Value, bool)> {
    let p = cfg.build_params()?;
    let r = cfg.radius.unwrap_or(6);
    let out = cfg.out.clone().ok_or_else(|| Error::Domain("sample-map needs --out".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let run = run_layers(&p, r, &mut rng, cfg.budget_vertices)?;
    let mut map = run.exploration.map().clone();
    map.validate()?;
    map.compact();
    crate::map::write_map(&map, std::io::BufWriter::new(std::fs::File::create(&out)?))?;
    let mut hull_path = out.clone().into_os_string();
    match cfg.format {
        Format::Csv => {
            hull_path.push(".hull.csv");
            write_hull_csv(std::fs::File::create(&hull_path)?, &run.hulls)?;
        }
        Format::Json => {
            hull_path.push(".hull.json");
            std::fs::write(&hull_path, serde_json::to_vec_pretty(&run.hulls)?)?;
        }
    }
    let mut v = header(&p, cfg);
    let o = v.as_object_mut().unwrap();
    o.insert("radius".into(), json!(r));
    o.insert("truncated".into(), json!(run.hulls.truncated));
    o.insert("steps".into(), json!(run.exploration.steps()));
    o.insert("vertices".into(), json!(map.vertex_count()));
    o.insert("perimeter".into(), json!(map.perimeter()));
    o.insert("hulls".into(), serde_json::to_value(&run.hulls)?);
    o.insert("map_file".into(), json!(out));
    o.insert("hull_file".into(), json!(PathBuf::from(hull_path)));
    Ok((v, run.hulls.truncated))
}

/// Names accepted by [`cmd_experiment`].
pub const EXPERIMENTS: &[&str] = &[
    "volume-growth",
    "layer-stats",
    "peeling-drift",
    "walk-speed",
    "inv-degree",
    "intersection",
    "stationarity",
    "law-equivalence",
    "selector-invariance",
    "boltzmann-two-gon",
    "enumerate",
];

pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<Value> {
    let name = cfg.experiment.clone().ok_or_else(|| Error::UnknownExperiment(String::new()))?;
    if !EXPERIMENTS.contains(&name.as_str()) {
        return Err(Error::UnknownExperiment(name));
    }
    if name == "enumerate" {
        let max_sum = cfg.steps.unwrap_or(8) as usize;
        return Ok(json!({ "experiment": name, "table": enumeration_table(max_sum)? }));
    }
    let p = cfg.build_params()?;
    let seed = cfg.seed;
    let trials = cfg.trials;
    let body = match name.as_str() {
        "volume-growth" => {
            let r = cfg.radius.unwrap_or(12);
            serde_json::to_value(hull_growth(&p, r.saturating_sub(4).max(1), r, trials.unwrap_or(50), seed, cfg.budget_vertices)?)?
        }
        "layer-stats" => {
            let r = cfg.radius.unwrap_or(10);
            serde_json::to_value(layer_times(&p, r.saturating_sub(4).max(1), r, trials.unwrap_or(50), seed, cfg.budget_vertices)?)?
        }
        "peeling-drift" => serde_json::to_value(peeling_drift(&p, cfg.steps.unwrap_or(10_000), trials.unwrap_or(100), seed)?)?,
        "walk-speed" => serde_json::to_value(speed_experiment(
            &p,
            cfg.steps.unwrap_or(10_000) as usize,
            trials.unwrap_or(20),
            cfg.radius.unwrap_or(6),
            seed,
            LEVEL,
        )?)?,
        "inv-degree" => serde_json::to_value(estimate_inv_degree(&p, trials.unwrap_or(100_000), seed, LEVEL, cfg.budget_vertices)?)?,
        "intersection" => {
            let n = cfg.steps.unwrap_or(1000) as usize;
            let checkpoints: Vec<usize> = [n / 100, n / 10, n / 4, n / 2, n].into_iter().filter(|&c| c >= 1).collect();
            serde_json::to_value(intersection_experiment(&p, &checkpoints, trials.unwrap_or(1000), seed, LEVEL)?)?
        }
        "stationarity" => {
            let k = cfg.steps.unwrap_or(5) as usize;
            let r = cfg.radius.unwrap_or(1);
            let t = trials.unwrap_or(20_000);
            let walk = stationarity_test(&p, BallView::WalkStep(k), r, t, seed)?;
            let reversed = stationarity_test(&p, BallView::Reversed, r, t, sub_seed(seed, 7))?;
            json!({ "walk": walk, "reversed": reversed })
        }
        "law-equivalence" => serde_json::to_value(law_equivalence(&p, cfg.steps.unwrap_or(10) as usize, trials.unwrap_or(100_000), 500, seed)?)?,
        "selector-invariance" => serde_json::to_value(selector_invariance(&p, cfg.steps.unwrap_or(5), trials.unwrap_or(100_000), seed)?)?,
        "boltzmann-two-gon" => serde_json::to_value(boltzmann_two_gon(&p, trials.unwrap_or(100_000), seed)?)?,
        _ => unreachable!(),
    };
    let mut v = header(&p, cfg);
    let o = v.as_object_mut().unwrap();
    o.insert("experiment".into(), json!(name));
    o.insert("result".into(), body);
    Ok(v)
}

/// Writes a report as pretty JSON, or as flattened `key,value` CSV rows.
pub fn write_report<W: Write>(mut w: W, report: &Value, format: Format) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, report)?;
            writeln!(w)?;
        }
        Format::Csv => {
            writeln!(w, "#schema=report/1")?;
            let mut cw = csv::Writer::from_writer(w);
            cw.write_record(["key", "value"])?;
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            for (k, v) in rows {
                cw.write_record([k, v])?;
            }
            cw.flush()?;
        }
    }
    Ok(())
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

// ---- experiments ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HullGrowthReport {
    /// `r` range of the perimeter ratios `|∂B̄_{r+1}|/|∂B̄_r|`.
    pub r_lo: u32,
    pub r_hi: u32,
    /// Per-trial mean ratio over the range.
    pub ratio: Estimate,
    /// `|B̄_r|/|∂B̄_r|` at `r_hi`.
    pub volume_ratio: Estimate,
    pub expected_ratio: f64,
    pub expected_volume_ratio: f64,
    pub trials: u64,
    pub truncated: u64,
    pub seeds: Vec<u64>,
}

/// Hull series of independent maps, computed without building the maps.
pub fn hull_series(p: &PeelParams, r_max: u32, trials: u64, seed: u64, budget: u64) -> Result<Vec<HullSeries>> {
    (0..trials)
        .into_par_iter()
        .map(|i| sweep_layers(p, r_max, &mut trial_rng(seed, i), budget))
        .collect()
}

pub fn hull_growth(p: &PeelParams, r_lo: u32, r_hi: u32, trials: u64, seed: u64, budget: u64) -> Result<HullGrowthReport> {
    let series = hull_series(p, r_hi + 1, trials, seed, budget)?;
    let truncated = series.iter().filter(|s| s.truncated).count() as u64;
    if truncated > 0 {
        return Err(Error::Budget(format!("{truncated} of {trials} hull runs hit the vertex budget")));
    }
    let mut ratios = Vec::new();
    let mut vols = Vec::new();
    for s in &series {
        let per: Vec<f64> = (r_lo..=r_hi)
            .map(|r| s.get(r + 1).unwrap().perimeter as f64 / s.get(r).unwrap().perimeter as f64)
            .collect();
        ratios.push(per.iter().sum::<f64>() / per.len() as f64);
        let h = s.get(r_hi).unwrap();
        vols.push(h.volume as f64 / h.perimeter as f64);
    }
    Ok(HullGrowthReport {
        r_lo,
        r_hi,
        ratio: t_interval(&ratios, LEVEL)?,
        volume_ratio: t_interval(&vols, LEVEL)?,
        expected_ratio: p.hull_growth(),
        expected_volume_ratio: p.hull_volume_ratio(),
        trials,
        truncated,
        seeds: (0..trials).map(|i| trial_seed(seed, i)).collect(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerTimeReport {
    pub r_lo: u32,
    pub r_hi: u32,
    /// Per-trial mean of `(τ_{r+1} − τ_r)/P_{τ_r}` over the range.
    pub ratio: Estimate,
    pub expected: f64,
    pub trials: u64,
    pub seeds: Vec<u64>,
}

/// Layer completion times for `r_lo ≤ r ≤ r_hi`; the ratio at `r` needs
/// the hull at `r + 1`.
pub fn layer_times(p: &PeelParams, r_lo: u32, r_hi: u32, trials: u64, seed: u64, budget: u64) -> Result<LayerTimeReport> {
    let series = hull_series(p, r_hi + 1, trials, seed, budget)?;
    if let Some(i) = series.iter().position(|s| s.truncated) {
        return Err(Error::Budget(format!("trial {i} hit the vertex budget")));
    }
    let ratios: Vec<f64> = series
        .iter()
        .map(|s| {
            let per: Vec<f64> = (r_lo..=r_hi)
                .map(|r| {
                    let (a, b) = (s.get(r).unwrap(), s.get(r + 1).unwrap());
                    (b.tau - a.tau) as f64 / a.perimeter as f64
                })
                .collect();
            per.iter().sum::<f64>() / per.len() as f64
        })
        .collect();
    Ok(LayerTimeReport {
        r_lo,
        r_hi,
        ratio: t_interval(&ratios, LEVEL)?,
        expected: p.layer_time_ratio(),
        trials,
        seeds: (0..trials).map(|i| trial_seed(seed, i)).collect(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriftReport {
    pub steps: u64,
    pub perimeter_rate: Estimate,
    pub volume_rate: Estimate,
    pub expected_perimeter_rate: f64,
    pub expected_volume_rate: f64,
    pub trials: u64,
}

/// `P_n/n` and `V_n/n` after `n` layered peeling steps.
pub fn peeling_drift(p: &PeelParams, n: u64, trials: u64, seed: u64) -> Result<DriftReport> {
    let rows: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let ex = run_algorithm(p, &mut LayersSelector, n, &mut trial_rng(seed, i))?;
            ex.map().validate()?;
            Ok((ex.perimeter() as f64 / n as f64, ex.volume() as f64 / n as f64))
        })
        .collect::<Result<_>>()?;
    let (ps, vs): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(DriftReport {
        steps: n,
        perimeter_rate: t_interval(&ps, LEVEL)?,
        volume_rate: t_interval(&vs, LEVEL)?,
        expected_perimeter_rate: p.drift,
        expected_volume_rate: p.volume_drift(),
        trials,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectorInvarianceReport {
    pub steps: u64,
    pub runs: u64,
    pub selectors: [String; 2],
    pub test: ChiSquare,
}

fn pv_sample<S: EdgeSelector>(p: &PeelParams, make: impl Fn(u64) -> S + Sync, n: u64, runs: u64, seed: u64) -> Result<HashMap<(u64, u64), u64>> {
    let rows: Vec<(u64, u64)> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            let mut sel = make(sub_seed(s, 1));
            let ex = run_algorithm(p, &mut sel, n, &mut ChaCha8Rng::seed_from_u64(s))?;
            Ok((ex.perimeter() as u64, ex.volume() as u64))
        })
        .collect::<Result<_>>()?;
    Ok(tally(rows))
}

/// Chi-square comparison of the law of `(P_n, V_n)` under the layers rule
/// and under uniformly random edge choice.
pub fn selector_invariance(p: &PeelParams, n: u64, runs: u64, seed: u64) -> Result<SelectorInvarianceReport> {
    let a = pv_sample(p, |_| LayersSelector, n, runs, seed)?;
    let b = pv_sample(p, UniformSelector::new, n, runs, sub_seed(seed, 2))?;
    Ok(SelectorInvarianceReport {
        steps: n,
        runs,
        selectors: ["layers".into(), "uniform".into()],
        test: chi_square_two_sample(&a, &b)?,
    })
}

/// Same as [`selector_invariance`] with the nearest-edge rule as second selector.
pub fn selector_invariance_nearest(p: &PeelParams, n: u64, runs: u64, seed: u64) -> Result<SelectorInvarianceReport> {
    let a = pv_sample(p, |_| LayersSelector, n, runs, seed)?;
    let b = pv_sample(p, |_| NearestSelector, n, runs, sub_seed(seed, 3))?;
    Ok(SelectorInvarianceReport {
        steps: n,
        runs,
        selectors: ["layers".into(), "nearest".into()],
        test: chi_square_two_sample(&a, &b)?,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LawEquivalenceReport {
    pub n: usize,
    pub samples: u64,
    pub horizon: usize,
    /// Acceptance rate of the rejection sampler.
    pub acceptance: f64,
    pub test: ChiSquare,
}

/// Perimeter `P_n` of the peeling against the free walk `Ξ_n` conditioned to
/// stay at least 2, sampled by rejection over `n + horizon` steps.
pub fn law_equivalence(p: &PeelParams, n: usize, samples: u64, horizon: usize, seed: u64) -> Result<LawEquivalenceReport> {
    let peel: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|i| Ok(run_algorithm(p, &mut LayersSelector, n as u64, &mut trial_rng(seed, i))?.perimeter() as u64))
        .collect::<Result<_>>()?;
    let seed2 = sub_seed(seed, 4);
    let walk: Vec<(u64, u64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed2, i);
            let mut tries = 0u64;
            loop {
                tries += 1;
                if let Some(x) = rejection_sample_xi(p, n, horizon, &mut rng) {
                    return (x as u64, tries);
                }
            }
        })
        .collect();
    let tries: u64 = walk.iter().map(|w| w.1).sum();
    let test = chi_square_two_sample(&tally(peel), &tally(walk.iter().map(|w| w.0)))?;
    Ok(LawEquivalenceReport { n, samples, horizon, acceptance: samples as f64 / tries as f64, test })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoGonReport {
    pub samples: u64,
    pub trivial: Estimate,
    pub volume: Estimate,
    pub expected_trivial: f64,
    pub expected_volume: f64,
}

/// Boltzmann triangulations of the 2-gon: probability of the trivial map
/// and mean inner volume.
pub fn boltzmann_two_gon(p: &PeelParams, samples: u64, seed: u64) -> Result<TwoGonReport> {
    let vols: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|i| fill(&mut CountSink, (), 2, p, &mut trial_rng(seed, i), crate::boltzmann::DEFAULT_VOLUME_BUDGET))
        .collect::<Result<_>>()?;
    let trivial = vols.iter().filter(|&&v| v == 0).count() as u64;
    let vf: Vec<f64> = vols.iter().map(|&v| v as f64).collect();
    Ok(TwoGonReport {
        samples,
        trivial: wilson(trivial, samples, LEVEL),
        volume: t_interval(&vf, LEVEL)?,
        expected_trivial: 1.0 / p.z(2),
        expected_volume: crate::params::mean_hole_volume(1, p.alpha)?,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnumerationRow {
    pub n: usize,
    pub p: usize,
    pub enumerated: u64,
    pub formula: String,
    pub agree: bool,
}

/// Brute-force counts against the closed formula for `n + p ≤ max_sum`.
pub fn enumeration_table(max_sum: usize) -> Result<Vec<EnumerationRow>> {
    let rows = enumerate_all(max_sum, 50_000_000)?;
    Ok(rows
        .into_iter()
        .map(|((n, p), c)| {
            let f = count_triangulations(n, p);
            EnumerationRow { n, p, enumerated: c.distinct, agree: f == c.distinct.into(), formula: f.to_string() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_report() {
        let cfg = ExperimentConfig::new(ParamText::Alpha(0.75));
        let v = cmd_constants(&cfg).unwrap();
        assert!((v["c_tilde_limit"].as_f64().unwrap() - 3.079201).abs() < 1e-6);
        let cfg = ExperimentConfig::new(ParamText::Kappa("2/27".into()));
        assert_eq!(cmd_constants(&cfg).unwrap()["drift"].as_f64().unwrap(), 0.0);
        let cfg = ExperimentConfig::new(ParamText::Kappa("0.08".into()));
        assert_eq!(cmd_constants(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_experiment() {
        let mut cfg = ExperimentConfig::new(ParamText::Alpha(0.75));
        cfg.experiment = Some("nope".into());
        assert!(matches!(cmd_experiment(&cfg), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn csv_report_flattens() {
        let v = json!({"a": 1, "b": {"c": [2, 3]}, "s": "x"});
        let mut buf = Vec::new();
        write_report(&mut buf, &v, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("b.c.1,3"));
        assert!(text.contains("s,x"));
    }
}
