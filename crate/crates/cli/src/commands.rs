use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fsit_core::experiments::{
    complexity_bench, distribution_sweep, similarity_scatter, BenchSpec, SweepSpec,
};
use fsit_core::io::{
    bench_csv, classification_csv, memory_to_dot, parse_scene, read_memory_file, sweep_csv,
    sweep_summary_csv, to_csv_string, write_memory_file, DotOptions, SceneInput,
};
use fsit_core::model::{InputInterface, ReificationMode, SceneObservation};
use fsit_core::sit::{classify, encode, observe, CategoryId, MemoryGraph};
use fsit_service::{AppState, ServiceDefaults};
use serde::Serialize;
use serde_json::json;

use crate::config::{echo, read_json, write_json, write_text, CliConfig};

const DEFAULT_OUT: &str = "out";
const DEFAULT_FUZZINESS: f64 = 0.3;

fn read_scene(path: &Path) -> Result<SceneInput> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scene(&text).with_context(|| format!("in {}", path.display()))
}

/// The memory named by `--memory` when the file exists, otherwise a fresh
/// one over the `declared` interface (the tabletop one by default). An
/// explicit `--mode` overrides the declared mode.
fn open_memory(cfg: &CliConfig, declared: Option<InputInterface>) -> Result<MemoryGraph> {
    let mode = cfg.mode.map(ReificationMode::from);
    match &cfg.memory {
        Some(path) if path.exists() => {
            let memory =
                read_memory_file(path).with_context(|| format!("in {}", path.display()))?;
            if let Some(a) = cfg.fuzziness.filter(|a| *a != memory.fuzziness()) {
                bail!(
                    "{} uses fuzziness {}, not {a}",
                    path.display(),
                    memory.fuzziness()
                );
            }
            if mode.is_some_and(|m| m != memory.interface().mode()) {
                bail!("{} uses {} mode", path.display(), memory.interface().mode());
            }
            Ok(memory)
        }
        _ => {
            let iface = match (declared, mode) {
                (Some(i), Some(m)) => i.with_mode(m),
                (Some(i), None) => i,
                (None, m) => InputInterface::tabletop(m.unwrap_or(ReificationMode::Simplified)),
            };
            Ok(MemoryGraph::new(
                iface,
                cfg.fuzziness.unwrap_or(DEFAULT_FUZZINESS),
            )?)
        }
    }
}

/// Grounds geometric layouts with the command-line kernel and noise when the
/// file brings none of its own; noise is reseeded per step.
fn observation(
    cfg: &CliConfig,
    input: SceneInput,
    iface: &InputInterface,
    step: u64,
) -> Result<SceneObservation> {
    let input = match input {
        SceneInput::Geometric(mut g) => {
            if g.kernel.is_none() {
                g.kernel = cfg.kernel_config()?;
            }
            if g.noise.is_none() {
                g.noise = cfg
                    .noise_config()?
                    .map(|n| n.with_seed(cfg.seed.unwrap_or(n.seed).wrapping_add(step)));
            }
            SceneInput::Geometric(g)
        }
        symbolic => symbolic,
    };
    let mut scene = input.to_observation(iface)?;
    if scene.timestamp == 0 {
        scene.timestamp = step;
    }
    Ok(scene)
}

#[derive(Serialize)]
struct StepRow {
    step: usize,
    scene_id: String,
    learned: bool,
    category: Option<u64>,
    max_degree: Option<f64>,
    max_similarity: Option<f64>,
    memory_size: usize,
}

pub fn observe_cmd(cfg: &CliConfig, scenes: &[PathBuf], force_learn: bool) -> Result<()> {
    if scenes.is_empty() {
        bail!("no scene files given");
    }
    let inputs = scenes
        .iter()
        .map(|p| read_scene(p))
        .collect::<Result<Vec<_>>>()?;
    let declared = inputs.iter().find_map(|i| i.interface().cloned());
    let mut memory = open_memory(cfg, declared)?;
    let params = cfg.params(memory.fuzziness())?;
    let dir = cfg.out_dir(DEFAULT_OUT)?;
    let iface = memory.interface().clone();

    let mut rows = Vec::new();
    for (i, (input, path)) in inputs.into_iter().zip(scenes).enumerate() {
        let step = i + 1;
        let scene = observation(cfg, input, &iface, step as u64)
            .with_context(|| format!("in {}", path.display()))?;
        let outcome = observe(&mut memory, &scene, &params, force_learn)
            .with_context(|| format!("observing {}", path.display()))?;
        let g = &outcome.classification;
        write_text(
            &dir.join(format!("step-{step:03}.csv")),
            &classification_csv(g)?,
        )?;
        let dot = memory_to_dot(
            &memory,
            DotOptions {
                reduce: false,
                classification: Some(g),
            },
        );
        write_text(&dir.join(format!("step-{step:03}.dot")), &dot)?;
        let row = StepRow {
            step,
            scene_id: scene.scene_id.clone(),
            learned: outcome.learned.is_some(),
            category: outcome.learned.map(|c| c.0),
            max_degree: g.max_degree(),
            max_similarity: g.max_similarity(),
            memory_size: memory.len(),
        };
        println!(
            "step {step} {}: learned={} top_p={} top_d={} memory={}",
            row.scene_id,
            match outcome.learned {
                Some(id) => id.to_string(),
                None => "no".into(),
            },
            fmt_opt(row.max_degree),
            fmt_opt(row.max_similarity),
            row.memory_size
        );
        rows.push(row);
    }
    write_text(&dir.join("steps.csv"), &to_csv_string(&rows)?)?;
    let memory_path = cfg
        .memory
        .clone()
        .unwrap_or_else(|| dir.join("memory.json"));
    write_memory_file(&memory_path, &memory)?;
    echo(
        &dir,
        "observe",
        cfg,
        &json!({ "scenes": scenes, "force_learn": force_learn, "params": params, "memory_file": memory_path }),
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

pub fn classify_cmd(cfg: &CliConfig, scene: &Path) -> Result<()> {
    let input = read_scene(scene)?;
    let declared = input.interface().cloned();
    let memory = open_memory(cfg, declared)?;
    let obs = observation(cfg, input, memory.interface(), 1)?;
    let graph = classify(&memory, &encode(&obs, memory.interface())?)?;
    let csv = classification_csv(&graph)?;
    if graph.is_empty() {
        eprintln!("{}: unclassified", obs.scene_id);
    }
    match &cfg.out {
        Some(_) => {
            let dir = cfg.out_dir(DEFAULT_OUT)?;
            write_text(&dir.join("classification.csv"), &csv)?;
            let dot = memory_to_dot(
                &memory,
                DotOptions {
                    reduce: false,
                    classification: Some(&graph),
                },
            );
            write_text(&dir.join("classification.dot"), &dot)?;
            echo(&dir, "classify", cfg, &json!({ "scene": scene }))?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn sweep_spec(cfg: &CliConfig, spec: Option<&Path>, preset: Option<&str>) -> Result<SweepSpec> {
    let mut spec = match (spec, preset) {
        (Some(path), _) => read_json::<SweepSpec>(path)?,
        (None, Some("balanced") | None) => SweepSpec::balanced_sweep(),
        (None, Some("unbalanced")) => SweepSpec::unbalanced_sweep(),
        (None, Some(other)) => bail!("unknown preset `{other}` (balanced, unbalanced)"),
    };
    if let Some(a) = cfg.fuzziness {
        spec.fuzziness = vec![a];
    }
    if let Some(mode) = cfg.mode {
        spec.mode = mode.into();
    }
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if let Some(kernel) = cfg.kernel_config()? {
        spec.kernel = kernel;
    }
    if let Some(noise) = cfg.noise_config()? {
        spec.noise = Some(noise);
    }
    spec.validate()?;
    Ok(spec)
}

pub fn sweep_cmd(cfg: &CliConfig, spec: Option<&Path>, preset: Option<&str>) -> Result<()> {
    let spec = sweep_spec(cfg, spec, preset)?;
    let dir = cfg.out_dir(DEFAULT_OUT)?;
    let results = distribution_sweep(&spec)?;
    write_text(&dir.join("sweep.csv"), &sweep_csv(&results)?)?;
    write_text(
        &dir.join("sweep_summary.csv"),
        &sweep_summary_csv(&results)?,
    )?;
    for r in &results {
        let s = &r.summary;
        println!(
            "a={}: classified {}/{} mean_p={:.4} mean_d={:.4} max_d={:.4}",
            s.fuzziness, s.classified, s.total, s.mean_degree, s.mean_similarity, s.max_similarity
        );
    }
    write_json(&dir.join("spec.json"), &spec)?;
    echo(&dir, "sweep", cfg, &json!({ "spec_file": "spec.json" }))
}

#[derive(Serialize)]
struct ScatterRow {
    fuzziness: f64,
    degree: f64,
    similarity: f64,
}

pub fn scatter_cmd(cfg: &CliConfig, spec: Option<&Path>, preset: Option<&str>) -> Result<()> {
    let spec = sweep_spec(cfg, spec, preset)?;
    let dir = cfg.out_dir(DEFAULT_OUT)?;
    let series = similarity_scatter(&spec)?;
    let rows = series.iter().flat_map(|s| {
        s.points.iter().map(move |p| ScatterRow {
            fuzziness: s.fuzziness,
            degree: p.degree,
            similarity: p.similarity,
        })
    });
    write_text(&dir.join("scatter.csv"), &to_csv_string(rows)?)?;
    for s in &series {
        println!(
            "a={}: {} classified placements",
            s.fuzziness,
            s.points.len()
        );
    }
    write_json(&dir.join("spec.json"), &spec)?;
    echo(&dir, "scatter", cfg, &json!({ "spec_file": "spec.json" }))
}

pub fn bench_cmd(cfg: &CliConfig, spec: Option<&Path>) -> Result<()> {
    let mut spec = match spec {
        Some(path) => read_json::<BenchSpec>(path)?,
        None => BenchSpec::default(),
    };
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if let Some(mode) = cfg.mode {
        spec.mode = mode.into();
    }
    spec.params = cfg.params(cfg.fuzziness.unwrap_or(spec.params.fuzziness))?;
    spec.validate()?;
    let dir = cfg.out_dir(DEFAULT_OUT)?;
    let rows = complexity_bench(&spec)?;
    write_text(&dir.join("bench.csv"), &bench_csv(&rows)?)?;
    println!("{} timing rows", rows.len());
    write_json(&dir.join("spec.json"), &spec)?;
    echo(&dir, "bench", cfg, &json!({ "spec_file": "spec.json" }))
}

pub fn export_cmd(cfg: &CliConfig, reduce: bool) -> Result<()> {
    let Some(path) = &cfg.memory else {
        bail!("export needs --memory");
    };
    let memory = read_memory_file(path).with_context(|| format!("in {}", path.display()))?;
    let dot = memory_to_dot(
        &memory,
        DotOptions {
            reduce,
            classification: None,
        },
    );
    match &cfg.out {
        Some(_) => {
            let dir = cfg.out_dir(DEFAULT_OUT)?;
            write_text(&dir.join("memory.dot"), &dot)?;
            echo(&dir, "export", cfg, &json!({ "reduce": reduce }))?;
        }
        None => print!("{dot}"),
    }
    Ok(())
}

pub fn annotate_cmd(cfg: &CliConfig, category: u64, label: Option<String>) -> Result<()> {
    let Some(path) = &cfg.memory else {
        bail!("annotate needs --memory");
    };
    let mut memory = read_memory_file(path).with_context(|| format!("in {}", path.display()))?;
    memory.annotate(CategoryId(category), label)?;
    write_memory_file(path, &memory)?;
    Ok(())
}

pub async fn serve_cmd(cfg: &CliConfig, addr: SocketAddr) -> Result<()> {
    let defaults = ServiceDefaults {
        params: cfg.params(cfg.fuzziness.unwrap_or(DEFAULT_FUZZINESS))?,
        mode: cfg.mode.map_or(ReificationMode::Simplified, Into::into),
    };
    fsit_service::serve(addr, AppState::new(defaults)).await?;
    Ok(())
}
