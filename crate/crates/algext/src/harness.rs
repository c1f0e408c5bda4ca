//! The batch experiment runner: binds configs to experiment drivers, emits
//! reports and replayable artifacts, and aggregates the shipped suites.
//!
//! Exit-code contract (enforced by the binary): 0 all-pass, 1 any-fail,
//! 2 infrastructure error.

use std::path::Path;
use std::time::Instant;

use crate::config::ExperimentConfig;
use crate::corpus;
use crate::error::{Error, Result};
use crate::experiments::{self, run_criterion, CriterionReport};
use crate::field::FieldCtx;
use crate::fourier::{bias_spectrum, classify_bias, Carrier, FiniteDistribution};
use crate::pipeline::{
    build_composition, build_ext11, build_ext_n1, build_full_rank, measure_extractor,
    BuildOptions, MeasureMode,
};
use crate::report::{ExperimentReport, ReportRow};

pub const ARTIFACT_VERSION: u64 = 1;

/// Wrap a config payload as a versioned artifact document.
pub fn artifact_document(kind: &str, payload: serde_json::Value) -> serde_json::Value {
    serde_json::json!({ "algext_artifact": ARTIFACT_VERSION, "kind": kind, "payload": payload })
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

/// Execute one experiment config and assemble its report. Deterministic
/// given the config (including rng_seed).
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let rayon_pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.shards)
        .build()
        .map_err(|e| Error::ConfigError(format!("thread pool: {e}")))?;
    let outcome: Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> =
        rayon_pool.install(|| dispatch(config));
    let (experiment, rows, artifacts) = outcome?;
    Ok(ExperimentReport::new(
        experiment,
        config.kind.clone(),
        config.echo.clone(),
        &artifacts,
        rows,
        start.elapsed().as_millis(),
        config.shards,
    ))
}

fn criterion_outcome(rep: CriterionReport) -> (String, Vec<ReportRow>, Vec<serde_json::Value>) {
    (format!("{} {}", rep.id, rep.name), rep.rows, rep.artifacts)
}

fn dispatch(
    config: &ExperimentConfig,
) -> Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> {
    let budgets = config.budgets;
    let check = config.check.as_deref();
    match (config.kind.as_str(), check) {
        ("gabidulin-norms", Some("rank")) => Ok(criterion_outcome(run_criterion("c01", budgets)?)),
        ("gabidulin-norms", _) => Ok(criterion_outcome(run_criterion("c02", budgets)?)),
        ("bias-spectrum", Some("dense-affine")) => {
            Ok(criterion_outcome(run_criterion("c03", budgets)?))
        }
        ("bias-spectrum", Some("mod-m-floor")) => {
            Ok(criterion_outcome(run_criterion("c04", budgets)?))
        }
        ("bias-spectrum", Some("entropy-floor")) => {
            Ok(criterion_outcome(run_criterion("c11", budgets)?))
        }
        ("bias-spectrum", Some("xor")) => Ok(criterion_outcome(run_criterion("c14", budgets)?)),
        ("bias-spectrum", _) => spectrum_experiment(config),
        ("rank-survey", _) => Ok(criterion_outcome(run_criterion("c05", budgets)?)),
        ("fiber-check", Some("counts")) => Ok(criterion_outcome(run_criterion("c07", budgets)?)),
        ("fiber-check", _) => Ok(criterion_outcome(run_criterion("c06", budgets)?)),
        ("weil-check", Some("bombieri")) => Ok(criterion_outcome(run_criterion("c08", budgets)?)),
        ("weil-check", _) if config.param("q").is_some() => weil_experiment(config),
        ("weil-check", _) => Ok(criterion_outcome(run_criterion("c13", budgets)?)),
        ("ext11", _) if config.param("field").is_some() => ext11_experiment(config),
        ("ext11", _) => Ok(criterion_outcome(run_criterion("c09", budgets)?)),
        ("extN1", _) => ext_n1_experiment(config),
        ("full-rank", _) => full_rank_experiment(config),
        ("composition", _) if config.param("field").is_some() => composition_experiment(config),
        ("composition", _) => Ok(criterion_outcome(run_criterion("c10", budgets)?)),
        ("affine", _) if config.param("q").is_some() => affine_experiment(config),
        ("affine", _) => Ok(criterion_outcome(run_criterion("c12", budgets)?)),
        (other, _) => Err(Error::ConfigError(format!("unknown experiment kind `{other}`"))),
    }
}

fn require_param<'a>(config: &'a ExperimentConfig, key: &str) -> Result<&'a str> {
    config
        .param(key)
        .ok_or_else(|| Error::ConfigError(format!("missing required param `{key}`")))
}

/// Standalone bias spectrum: exact spectrum of a corpus source (or the
/// uniform distribution) with classification at the configured epsilon.
fn spectrum_experiment(
    config: &ExperimentConfig,
) -> Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> {
    let field = require_param(config, "field")?;
    let ctx = FieldCtx::parse_token(field)?;
    let source_id = config.param("source_id").unwrap_or("uniform");
    let eps = config.param_f64("epsilon")?.unwrap_or(1e-9);
    let dist = if source_id == "uniform" {
        FiniteDistribution::uniform(Carrier::field(ctx.clone()))
    } else {
        let entry = corpus::find_entry(source_id)?;
        experiments::entry_source_distribution(&entry, &ctx, config.budgets.enumeration)?
    };
    let spec = bias_spectrum(&dist, config.budgets.dft)?;
    let cls = classify_bias(&dist.carrier, &spec, eps);
    let max_bias = spec.max_nontrivial_bias();
    let rows = vec![
        ReportRow::new(
            format!("{source_id} over {field}: max nontrivial bias"),
            max_bias,
            eps,
            source_id != "uniform" || max_bias <= 1e-9,
            "exact",
        ),
        ReportRow::new(
            format!("violators (strongly = {})", cls.strongly),
            cls.e_count as f64,
            f64::INFINITY,
            true,
            "exact",
        ),
    ];
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(Path::new(dir).join("spectrum.csv"), spec.to_csv())?;
    }
    Ok(("bias-spectrum".into(), rows, vec![dist.to_json()]))
}

fn weil_experiment(
    config: &ExperimentConfig,
) -> Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> {
    let q: u64 = require_param(config, "q")?
        .parse()
        .map_err(|_| Error::ConfigError("bad q".into()))?;
    let d = config.param_u64("d")?.unwrap_or(3);
    let trials = config.param_u64("trials")?.unwrap_or(50) as usize;
    let seed = config.require_seed()?;
    let chk = crate::affine::weil_sum_check(q, d, trials, seed)?;
    let rows: Vec<ReportRow> = chk
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            ReportRow::new(format!("trial {i}"), r.abs_sum, r.bound, r.pass, "exact")
        })
        .collect();
    Ok(("weil-check standalone".into(), rows, Vec::new()))
}

fn measure_against_source(
    config: &ExperimentConfig,
    ctx: &FieldCtx,
    extractor_id: &str,
    extract: impl Fn(&[crate::field::FieldElement]) -> Result<u64>,
    m_out: u32,
    declared_eps: f64,
) -> Result<Vec<ReportRow>> {
    let Some(source_id) = config.param("source_id") else { return Ok(Vec::new()) };
    let entry = corpus::find_entry(source_id)?;
    let src = experiments::entry_source_distribution(&entry, ctx, config.budgets.enumeration)?;
    let mode = match config.param_u64("samples")? {
        Some(s) => MeasureMode::MonteCarlo { samples: s, seed: config.require_seed()? },
        None => MeasureMode::Exact,
    };
    let meas = measure_extractor(extract, m_out, &src, mode)?;
    let pass = meas.distance <= declared_eps + meas.noise_floor;
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        let mut csv = crate::report::measurement_csv_header().to_string();
        csv.push_str(&crate::report::measurement_csv_row(
            source_id,
            extractor_id,
            &meas.mode,
            meas.distance,
            meas.noise_floor,
            declared_eps,
            pass,
        ));
        std::fs::write(Path::new(dir).join("measurements.csv"), csv)?;
    }
    Ok(vec![ReportRow::new(
        format!("{source_id}: distance (floor {})", meas.noise_floor),
        meas.distance,
        declared_eps + meas.noise_floor,
        pass,
        &meas.mode,
    )])
}

fn ext11_experiment(
    config: &ExperimentConfig,
) -> Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> {
    let ctx = FieldCtx::parse_token(require_param(config, "field")?)?;
    let d = config.param_u64("d")?.unwrap_or(2);
    let eps = config.param_f64("epsilon")?.unwrap_or(0.125);
    let cfg = build_ext11(&ctx, d, eps, BuildOptions::default())?;
    let mut rows = vec![ReportRow::new(
        format!("built ext11 m_out={} bound_feasible={}", cfg.m_out, cfg.bound_feasible),
        cfg.m_out as f64,
        f64::INFINITY,
        true,
        "structural",
    )];
    rows.extend(measure_against_source(config, &ctx, "ext11", |x| cfg.extract(&x[0]), cfg.m_out, eps)?);
    let art = artifact_document("ext11", cfg.to_json());
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            Path::new(dir).join("ext11-artifact.json"),
            serde_json::to_string_pretty(&art)?,
        )?;
    }
    Ok(("ext11 standalone".into(), rows, vec![art]))
}

fn ext_n1_experiment(
    config: &ExperimentConfig,
) -> Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> {
    let ctx = FieldCtx::parse_token(require_param(config, "field")?)?;
    let n = config.param_u64("n")?.unwrap_or(3) as usize;
    let d = config.param_u64("d")?.unwrap_or(2);
    let eps = config.param_f64("epsilon")?.unwrap_or(0.125);
    let cfg = build_ext_n1(&ctx, n, d, eps, BuildOptions::default())?;
    let mut rows = vec![ReportRow::new(
        format!("built extN1 degrees {:?} d'={}", cfg.rank_map.degrees.degrees, cfg.d_prime),
        cfg.m_out() as f64,
        f64::INFINITY,
        true,
        "structural",
    )];
    rows.extend(measure_against_source(config, &ctx, "ext-n1", |x| cfg.extract(x), cfg.m_out(), eps)?);
    let art = artifact_document("ext-n1", cfg.to_json());
    Ok(("extN1 standalone".into(), rows, vec![art]))
}

fn full_rank_experiment(
    config: &ExperimentConfig,
) -> Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> {
    let ctx = FieldCtx::parse_token(require_param(config, "field")?)?;
    let k = config.param_u64("k")?.unwrap_or(2) as usize;
    let d = config.param_u64("d")?.unwrap_or(2);
    let eps = config.param_f64("epsilon")?.unwrap_or(0.25);
    let cfg = build_full_rank(&ctx, k, d, eps, BuildOptions::default())?;
    let rows = vec![ReportRow::new(
        format!("built full-rank k={k} m_out={}", cfg.m_out()),
        cfg.m_out() as f64,
        f64::INFINITY,
        true,
        "structural",
    )];
    let art = artifact_document("full-rank", cfg.to_json());
    Ok(("full-rank standalone".into(), rows, vec![art]))
}

fn composition_experiment(
    config: &ExperimentConfig,
) -> Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> {
    let ctx = FieldCtx::parse_token(require_param(config, "field")?)?;
    let n = config.param_u64("n")?.unwrap_or(3) as usize;
    let k = config.param_u64("k")?.unwrap_or(2) as usize;
    let d = config.param_u64("d")?.unwrap_or(4);
    let eps = config.param_f64("epsilon")?.unwrap_or(0.125);
    let cfg = build_composition(&ctx, n, k, d, eps, BuildOptions::default())?;
    let mut rows = vec![ReportRow::new(
        format!("built composition m_out={}", cfg.m_out()),
        cfg.m_out() as f64,
        f64::INFINITY,
        true,
        "structural",
    )];
    rows.extend(measure_against_source(config, &ctx, "composition", |x| cfg.extract(x), cfg.m_out(), eps)?);
    let art = artifact_document("composition", cfg.to_json());
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            Path::new(dir).join("composition-artifact.json"),
            serde_json::to_string_pretty(&art)?,
        )?;
    }
    Ok(("composition standalone".into(), rows, vec![art]))
}

fn affine_experiment(
    config: &ExperimentConfig,
) -> Result<(String, Vec<ReportRow>, Vec<serde_json::Value>)> {
    use crate::affine::{build_affine_ext, good_degrees, measure_affine_bias, sample_subspace};
    let q: u64 = require_param(config, "q")?
        .parse()
        .map_err(|_| Error::ConfigError("bad q".into()))?;
    let n = config.param_u64("n")?.unwrap_or(4) as usize;
    let k = config.param_u64("k")?.unwrap_or(2) as usize;
    let m = config.param_u64("m")?.unwrap_or(1) as usize;
    let epsilon = config.param_f64("epsilon")?.unwrap_or(0.25);
    let relax = config.param("relax").map(|v| v == "true").unwrap_or(true);
    let seed = config.require_seed()?;
    let chars = match config.param_u64("chars")? {
        Some(c) => crate::affine::CharSelection::Sample { count: c as usize, rng_seed: seed },
        None => crate::affine::CharSelection::Sample {
            count: crate::constants::AFFINE_CHAR_SAMPLES,
            rng_seed: seed,
        },
    };
    let degrees = good_degrees(n, q, epsilon, relax)?;
    let big_d = degrees.big_d;
    let ext = build_affine_ext(n, m, q, degrees)?;
    let sub = sample_subspace(n, k, q, seed)?;
    let rep = measure_affine_bias(&ext, &sub, chars, config.budgets.enumeration)?;
    let proof_bound =
        (big_d as f64).powf(k as f64 / 2.0) * (q as f64).powf(-(k as f64) / 4.0) + 1e-6;
    let mut csv = String::from("q,n,k,m,D,c_index,abs_bias,proof_bound,pass\n");
    let rows: Vec<ReportRow> = rep
        .rows
        .iter()
        .map(|r| {
            let qualifies = 2 * r.nonzero_pivots >= k;
            let pass = !qualifies || r.abs_bias <= proof_bound;
            csv.push_str(&format!(
                "{q},{n},{k},{m},{big_d},{},{},{proof_bound},{pass}\n",
                r.c_index, r.abs_bias
            ));
            ReportRow::new(
                format!("c={} pivots={}", r.c_index, r.nonzero_pivots),
                r.abs_bias,
                proof_bound,
                pass,
                "exact",
            )
        })
        .collect();
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(Path::new(dir).join("affine-bias.csv"), csv)?;
    }
    Ok(("affine standalone".into(), rows, Vec::new()))
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

/// Replay an artifact against an input file: one comma-separated tuple of
/// canonical coordinate indices per line; outputs one decimal value per
/// line. Builders are pure functions of their recorded parameters, so a
/// rebuilt config replays bit-identically; structural echoes are checked
/// against the stored payload.
pub fn replay(artifact_path: &Path, input_path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(artifact_path)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::ArtifactVersionMismatch(format!("unparseable artifact: {e}")))?;
    let version = doc.get("algext_artifact").and_then(|v| v.as_u64());
    if version != Some(ARTIFACT_VERSION) {
        return Err(Error::ArtifactVersionMismatch(format!(
            "artifact version {version:?}, expected {ARTIFACT_VERSION}"
        )));
    }
    let kind = doc
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::ArtifactVersionMismatch("missing kind".into()))?;
    let payload = doc
        .get("payload")
        .ok_or_else(|| Error::ArtifactVersionMismatch("missing payload".into()))?;
    let input = std::fs::read_to_string(input_path)?;

    let gets = |v: &serde_json::Value, k: &str| -> Result<String> {
        v.get(k)
            .and_then(|x| x.as_str())
            .map(|s| s.to_string())
            .ok_or_else(|| Error::ArtifactVersionMismatch(format!("payload missing {k}")))
    };
    let getu = |v: &serde_json::Value, k: &str| -> Result<u64> {
        v.get(k)
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::ArtifactVersionMismatch(format!("payload missing {k}")))
    };
    let getf = |v: &serde_json::Value, k: &str| -> Result<f64> {
        v.get(k)
            .and_then(|x| x.as_f64())
            .ok_or_else(|| Error::ArtifactVersionMismatch(format!("payload missing {k}")))
    };

    let mut out = String::new();
    match kind {
        "ext11" => {
            let ctx = FieldCtx::parse_token(&gets(payload, "field")?)?;
            let cfg = build_ext11(
                &ctx,
                getu(payload, "d")?,
                getf(payload, "eps")?,
                BuildOptions::desk_with_policy(getf(payload, "policy_eps")?),
            )?;
            if cfg.m_out as u64 != getu(payload, "m_out")? {
                return Err(Error::ArtifactVersionMismatch(
                    "rebuilt config disagrees with stored echo".into(),
                ));
            }
            for line in input.lines().filter(|l| !l.trim().is_empty()) {
                let x = experiments::parse_input_line(&ctx, line)?;
                out.push_str(&format!("{}\n", cfg.extract(&x[0])?));
            }
        }
        "ext-n1" => {
            let ctx = FieldCtx::parse_token(&gets(payload, "field")?)?;
            let cfg = build_ext_n1(
                &ctx,
                getu(payload, "n")? as usize,
                getu(payload, "d")?,
                getf(payload, "eps")?,
                BuildOptions::default(),
            )?;
            for line in input.lines().filter(|l| !l.trim().is_empty()) {
                let x = experiments::parse_input_line(&ctx, line)?;
                out.push_str(&format!("{}\n", cfg.extract(&x)?));
            }
        }
        "composition" => {
            let ctx = FieldCtx::parse_token(&gets(payload, "field")?)?;
            let cfg = build_composition(
                &ctx,
                getu(payload, "n")? as usize,
                getu(payload, "k")? as usize,
                getu(payload, "d")?,
                getf(payload, "eps")?,
                BuildOptions::default(),
            )?;
            if cfg.m_out() as u64 != getu(payload, "m_out")? {
                return Err(Error::ArtifactVersionMismatch(
                    "rebuilt config disagrees with stored echo".into(),
                ));
            }
            for line in input.lines().filter(|l| !l.trim().is_empty()) {
                let x = experiments::parse_input_line(&ctx, line)?;
                out.push_str(&format!("{}\n", cfg.extract(&x)?));
            }
        }
        "bilinear" => {
            let params = crate::lowbias::GabidulinParams::new(
                getu(payload, "p")?,
                getu(payload, "k")? as usize,
                getu(payload, "r")? as usize,
                getu(payload, "s")? as usize,
                getu(payload, "t")? as usize,
            )?;
            let ext = crate::lowbias::BilinearExtractor::build(params)?;
            let stored = payload.get("matrices").cloned().unwrap_or_default();
            if serde_json::json!(ext.matrices) != stored {
                return Err(Error::ArtifactVersionMismatch(
                    "rebuilt matrices disagree with stored echo".into(),
                ));
            }
            let p = ext.params.p;
            for line in input.lines().filter(|l| !l.trim().is_empty()) {
                let coords = line
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u64>()
                            .ok()
                            .filter(|&v| v < p)
                            .ok_or_else(|| Error::ConfigError(format!("bad residue `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.push_str(&format!("{}\n", ext.extract_index(&coords)?));
            }
        }
        other => {
            return Err(Error::ArtifactVersionMismatch(format!(
                "replay does not support artifact kind `{other}`"
            )))
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// suites
// ---------------------------------------------------------------------------

static SUITE_FULL: &[(&str, &str)] = &[
    ("c01", include_str!("../data/suite/full/c01-gabidulin-rank.ini")),
    ("c02", include_str!("../data/suite/full/c02-fourier-norms.ini")),
    ("c03", include_str!("../data/suite/full/c03-biased-extraction.ini")),
    ("c04", include_str!("../data/suite/full/c04-mod-m-floor.ini")),
    ("c05", include_str!("../data/suite/full/c05-seeded-rank.ini")),
    ("c06", include_str!("../data/suite/full/c06-fiber-finiteness.ini")),
    ("c07", include_str!("../data/suite/full/c07-point-counts.ini")),
    ("c08", include_str!("../data/suite/full/c08-bombieri.ini")),
    ("c09", include_str!("../data/suite/full/c09-ext11.ini")),
    ("c10", include_str!("../data/suite/full/c10-composition.ini")),
    ("c11", include_str!("../data/suite/full/c11-entropy-floor.ini")),
    ("c12", include_str!("../data/suite/full/c12-affine.ini")),
    ("c13", include_str!("../data/suite/full/c13-weil.ini")),
    ("c14", include_str!("../data/suite/full/c14-xor.ini")),
];

static SUITE_SMOKE: &[&str] = &["c01", "c02", "c03", "c04", "c05", "c13", "c14"];

pub struct SuiteOutcome {
    pub reports: Vec<(String, ExperimentReport)>,
    pub pass: bool,
}

/// Run a shipped suite. `smoke` covers the fast criteria; `full` executes
/// every acceptance criterion through its shipped config file.
pub fn suite(name: &str) -> Result<SuiteOutcome> {
    let selected: Vec<(&str, &str)> = match name {
        "full" => SUITE_FULL.to_vec(),
        "smoke" => SUITE_FULL
            .iter()
            .filter(|(id, _)| SUITE_SMOKE.contains(id))
            .copied()
            .collect(),
        other => return Err(Error::ConfigError(format!("unknown suite `{other}`"))),
    };
    let mut reports = Vec::new();
    let mut pass = true;
    for (id, text) in selected {
        let config = ExperimentConfig::parse(text)?;
        let report = run(&config)?;
        pass &= report.pass;
        reports.push((id.to_string(), report));
    }
    Ok(SuiteOutcome { reports, pass })
}

/// Human-readable corpus listing.
pub fn corpus_listing() -> Result<String> {
    let mut out = String::new();
    for entry in corpus::load_corpus()? {
        out.push_str(&format!(
            "{:<22} {:<8} fields: {:<28} {}\n",
            entry.id,
            match entry.kind {
                corpus::EntryKind::Variety => "variety",
                corpus::EntryKind::Source => "source",
            },
            entry.fields.join(","),
            entry.description
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_unknown_kind_errors() {
        let cfg = ExperimentConfig::parse("[experiment]\nkind = nonsense\n").unwrap();
        assert!(matches!(run(&cfg), Err(Error::ConfigError(_))));
    }

    #[test]
    fn weil_standalone_run_has_trial_rows() {
        let cfg = ExperimentConfig::parse(
            "[experiment]\nkind = weil-check\nrng_seed = 7\n[params]\nq = 101\nd = 3\ntrials = 50\n",
        )
        .unwrap();
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 50);
        assert!(rep.pass);
    }

    #[test]
    fn spectrum_uniform_passes() {
        let cfg = ExperimentConfig::parse(
            "[experiment]\nkind = bias-spectrum\n[params]\nfield = 101\n",
        )
        .unwrap();
        let rep = run(&cfg).unwrap();
        assert!(rep.pass);
        assert!(rep.rows[0].metric <= 1e-9);
    }

    #[test]
    fn report_determinism_modulo_wallclock() {
        let cfg = ExperimentConfig::parse(
            "[experiment]\nkind = weil-check\nrng_seed = 7\n[params]\nq = 101\nd = 2\ntrials = 10\n",
        )
        .unwrap();
        let r1 = run(&cfg).unwrap();
        let r2 = run(&cfg).unwrap();
        assert_eq!(r1.content_hash, r2.content_hash);
        let rows1: Vec<String> = r1.rows.iter().map(|r| format!("{r:?}")).collect();
        let rows2: Vec<String> = r2.rows.iter().map(|r| format!("{r:?}")).collect();
        assert_eq!(rows1, rows2);
    }

    #[test]
    fn replay_round_trip_ext11() {
        let dir = tempfile::tempdir().unwrap();
        let art_path = dir.path().join("a.json");
        let in_path = dir.path().join("in.txt");
        let ctx = FieldCtx::parse_token("1009").unwrap();
        let cfg = build_ext11(&ctx, 2, 0.25, BuildOptions::default()).unwrap();
        let doc = artifact_document("ext11", cfg.to_json());
        std::fs::write(&art_path, serde_json::to_string(&doc).unwrap()).unwrap();
        std::fs::write(&in_path, "0\n1\n17\n1008\n").unwrap();
        let out1 = replay(&art_path, &in_path).unwrap();
        let out2 = replay(&art_path, &in_path).unwrap();
        assert_eq!(out1, out2);
        let vals: Vec<u64> = out1.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(vals.len(), 4);
        for (i, idx) in [0u128, 1, 17, 1008].iter().enumerate() {
            assert_eq!(vals[i], cfg.extract_index(*idx));
        }
    }

    #[test]
    fn replay_rejects_truncated_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let art_path = dir.path().join("a.json");
        let in_path = dir.path().join("in.txt");
        std::fs::write(&art_path, "{\"algext_artifact\": 1, \"kind\": \"ext11\"").unwrap();
        std::fs::write(&in_path, "0\n").unwrap();
        assert!(matches!(
            replay(&art_path, &in_path),
            Err(Error::ArtifactVersionMismatch(_))
        ));
        // wrong version
        std::fs::write(&art_path, "{\"algext_artifact\": 99, \"kind\": \"ext11\"}").unwrap();
        assert!(matches!(
            replay(&art_path, &in_path),
            Err(Error::ArtifactVersionMismatch(_))
        ));
    }

    #[test]
    fn corpus_listing_mentions_every_entry() {
        let listing = corpus_listing().unwrap();
        for entry in corpus::load_corpus().unwrap() {
            assert!(listing.contains(&entry.id));
        }
    }

    #[test]
    fn full_suite_covers_every_criterion_exactly_once() {
        let suite_ids: Vec<&str> = SUITE_FULL.iter().map(|(id, _)| *id).collect();
        let criterion_ids: Vec<&str> =
            crate::experiments::CRITERIA.iter().map(|(id, _)| *id).collect();
        assert_eq!(suite_ids, criterion_ids);
        // and every shipped config parses
        for (_, text) in SUITE_FULL {
            ExperimentConfig::parse(text).unwrap();
        }
    }

    #[test]
    fn bilinear_artifact_replays() {
        let params = crate::lowbias::GabidulinParams::new(2, 1, 2, 2, 2).unwrap();
        let ext = crate::lowbias::BilinearExtractor::build(params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let art_path = dir.path().join("b.json");
        let in_path = dir.path().join("in.txt");
        let doc = artifact_document("bilinear", ext.to_json());
        std::fs::write(&art_path, serde_json::to_string(&doc).unwrap()).unwrap();
        std::fs::write(&in_path, "0,0,1,1\n1,0,1,1\n1,1,1,0\n").unwrap();
        let out = replay(&art_path, &in_path).unwrap();
        let want: Vec<u64> = ["0,0,1,1", "1,0,1,1", "1,1,1,0"]
            .iter()
            .map(|l| {
                let coords: Vec<u64> = l.split(',').map(|t| t.parse().unwrap()).collect();
                ext.extract_index(&coords).unwrap()
            })
            .collect();
        let got: Vec<u64> = out.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(got, want);
    }
}
