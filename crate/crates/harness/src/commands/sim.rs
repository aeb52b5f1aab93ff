use std::fs;
use std::path::Path;

use dab_core::{interchange, RebalanceConfig};
use mihbench::{compute_metrics, io, QAInstance, TaskKind};
use serde::{Deserialize, Serialize};
use toy_decoder::{
    forward, segments, simulate_suite, DecoderConfig, DetectionCurve, LayerSelection, ReadoutModel,
    SimRecord, SyntheticScene,
};

use super::eval::ReportLine;
use super::{announce, prepare_dir, write_csv, write_jsonl, DEFAULT_SEED};
use crate::cli::{CurveArg, LayersArg, RunSimArgs, SimArgs};
use crate::error::{HarnessError, Result};
use crate::manifest::RunManifest;

/// Everything the simulator needs, as read from a config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub decoder: DecoderConfig,
    pub readout: ReadoutModel,
    pub rebalance: RebalanceConfig,
}

/// Merges `base`, then the config file, then flags and the seed.
pub fn resolve_sim_config(args: &SimArgs, seed: Option<u64>, base: SimConfig) -> Result<SimConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let mut value: serde_json::Value = serde_json::from_str(&text)?;
            let mut merged = serde_json::to_value(&base)?;
            merge(&mut merged, value.take());
            serde_json::from_value(merged)
                .map_err(|e| HarnessError::usage(format!("config `{}`: {e}", path.display())))?
        }
        None => base,
    };
    let d = &mut cfg.decoder;
    if let Some(s) = seed {
        d.seed = s;
    }
    set(&mut d.skew, args.skew);
    if args.skew_target.is_some() {
        d.skew_target = args.skew_target;
    }
    set(&mut d.layers, args.layers);
    set(&mut d.heads, args.heads);
    set(&mut d.model_dim, args.model_dim);
    set(&mut d.tokens_per_image, args.tokens_per_image);
    set(&mut d.text_tokens, args.text_tokens);
    if let Some(c) = args.curve {
        cfg.readout.curve = match c {
            CurveArg::Step => DetectionCurve::Step,
            CurveArg::Linear => DetectionCurve::Linear,
            CurveArg::Certain => DetectionCurve::Certain,
        };
    }
    if let Some(l) = args.readout_layers {
        cfg.readout.layers = match l {
            LayersArg::Final => LayerSelection::Final,
            LayersArg::All => LayerSelection::All,
        };
    }
    let r = &mut cfg.rebalance;
    set(&mut r.alpha, args.alpha);
    set(&mut r.tau, args.tau);
    set(&mut r.clamp_mode, args.clamp_mode);
    set(&mut r.scope, args.scope);

    cfg.decoder.validate()?;
    cfg.readout.validate()?;
    cfg.rebalance.validate()?;
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Overlays `patch` onto `target`, object by object.
fn merge(target: &mut serde_json::Value, patch: serde_json::Value) {
    match (target, patch) {
        (serde_json::Value::Object(t), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                merge(t.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (t, p) => *t = p,
    }
}

pub(crate) fn require_existence(instances: &[QAInstance]) -> Result<()> {
    if let Some(bad) = instances.iter().find(|i| i.task != TaskKind::Existence) {
        return Err(HarnessError::data(format!(
            "the simulator only answers existence questions; instance `{}` is a {} question",
            bad.id, bad.task
        )));
    }
    Ok(())
}

/// Baseline records and, if requested, balanced records.
pub(crate) fn simulate(
    instances: &[QAInstance],
    cfg: &SimConfig,
    dab: bool,
) -> Result<Vec<(&'static str, Vec<SimRecord>)>> {
    require_existence(instances)?;
    let mut runs = vec![(
        "baseline",
        simulate_suite(instances, &cfg.decoder, &cfg.readout, None)?,
    )];
    if dab {
        runs.push((
            "dab",
            simulate_suite(instances, &cfg.decoder, &cfg.readout, Some(&cfg.rebalance))?,
        ));
    }
    Ok(runs)
}

pub(crate) fn summarize(
    instances: &[QAInstance],
    runs: &[(&'static str, Vec<SimRecord>)],
    manifest: &str,
) -> Result<Vec<ReportLine>> {
    let gold: Vec<_> = instances.iter().map(|i| i.gold).collect();
    runs.iter()
        .map(|(variant, records)| {
            let preds: Vec<_> = records.iter().map(SimRecord::prediction).collect();
            let report = compute_metrics(&preds, &gold)?;
            Ok(ReportLine::new(
                &report.to_row("existence", variant),
                manifest,
            ))
        })
        .collect()
}

#[derive(Serialize)]
struct Snapshot<'a> {
    seed: u64,
    dab: bool,
    dump_attention: usize,
    sim: &'a SimConfig,
}

pub fn run_sim(args: &RunSimArgs, seed: Option<u64>) -> Result<RunManifest> {
    let cfg = resolve_sim_config(&args.sim, seed, SimConfig::default())?;
    let instances: Vec<QAInstance> = io::load_jsonl(&args.dataset)?;
    prepare_dir(&args.out)?;
    let mut manifest = RunManifest::new(
        "run-sim",
        &Snapshot {
            seed: seed.unwrap_or(DEFAULT_SEED),
            dab: args.sim.dab,
            dump_attention: args.dump_attention,
            sim: &cfg,
        },
    )?;
    manifest.add_input("dataset", &args.dataset)?;

    let runs = simulate(&instances, &cfg, args.sim.dab)?;
    for (variant, records) in &runs {
        write_jsonl(
            &args.out,
            &format!("predictions-{variant}.jsonl"),
            &mut manifest,
            records,
        )?;
    }
    let summary = summarize(&instances, &runs, &manifest.hash.clone())?;
    write_csv(
        &args.out,
        "summary.csv",
        &mut manifest,
        ReportLine::HEADER,
        &summary,
    )?;
    if args.dump_attention > 0 {
        dump_attention(
            &args.out,
            &instances[..args.dump_attention.min(instances.len())],
            &cfg,
            args.sim.dab,
            &mut manifest,
        )?;
    }
    manifest.write(&args.out)?;
    announce(&manifest)?;
    Ok(manifest)
}

fn dump_attention(
    out: &Path,
    instances: &[QAInstance],
    cfg: &SimConfig,
    dab: bool,
    manifest: &mut RunManifest,
) -> Result<()> {
    let dir = out.join("attention");
    prepare_dir(&dir)?;
    for inst in instances {
        let scene = SyntheticScene::from_instance(inst)?;
        let seg = segments(&scene, &cfg.decoder)?;
        let tensor = forward(&scene, &cfg.decoder)?;
        let mut dumps = vec![("baseline", tensor.clone())];
        if dab {
            dumps.push((
                "dab",
                dab_core::rebalance_tensor(&tensor, &seg, &cfg.rebalance)?.adjusted,
            ));
        }
        for (variant, t) in dumps {
            let name = format!("attention/{}.{variant}.dab", inst.id);
            fs::write(
                out.join(&name),
                interchange::to_string(&t, &seg, interchange::Encoding::Csv)?,
            )?;
            manifest.outputs.push(name);
        }
    }
    Ok(())
}
