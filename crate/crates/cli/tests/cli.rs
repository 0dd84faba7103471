use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fsit_core::experiments::tabletop_sequence;
use fsit_core::io::read_memory_file;

fn fsit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsit"))
        .args(args)
        .env_remove("FSIT_FUZZINESS")
        .env_remove("FSIT_MEMORY")
        .env_remove("FSIT_OUT")
        .output()
        .unwrap()
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_sequence(dir: &Path) -> Vec<PathBuf> {
    tabletop_sequence()
        .iter()
        .map(|s| {
            let path = dir.join(format!("{}.json", s.scene_id));
            std::fs::write(&path, serde_json::to_string_pretty(s).unwrap()).unwrap();
            path
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn observe_sequence(dir: &Path, a: &str) -> PathBuf {
    let scenes = write_sequence(dir);
    let memory = dir.join(format!("memory-{a}.json"));
    let out = dir.join(format!("out-{a}"));
    let mut args = vec![
        "observe",
        "--fuzziness",
        a,
        "--memory",
        s(&memory),
        "--out",
        s(&out),
    ];
    args.extend(scenes.iter().map(|p| s(p)));
    ok(fsit(&args));
    memory
}

#[test]
fn observing_five_scenes_learns_five_categories() {
    let dir = tempfile::tempdir().unwrap();
    let memory = observe_sequence(dir.path(), "0.3");
    assert_eq!(read_memory_file(&memory).unwrap().len(), 5);
    let out = dir.path().join("out-0.3");
    for name in ["steps.csv", "step-001.csv", "step-005.dot", "config.json"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let echoed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["command"], "observe");
    assert_eq!(echoed["config"]["fuzziness"], 0.3);
}

#[test]
fn repeated_scene_is_not_relearned() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_sequence(dir.path()).remove(0);
    let out = dir.path().join("out");
    let stdout = ok(fsit(&["observe", "--out", s(&out), s(&scene), s(&scene)]));
    let lines: Vec<_> = stdout.lines().collect();
    assert!(lines[0].contains("learned=Φ1"), "{stdout}");
    assert!(lines[1].contains("learned=no"), "{stdout}");
    let steps = std::fs::read_to_string(out.join("steps.csv")).unwrap();
    assert!(steps.lines().nth(2).unwrap().contains(",false,"));
    assert!(out.join("memory.json").exists());
}

#[test]
fn higher_fuzziness_keeps_at_least_as_many_edges() {
    let dir = tempfile::tempdir().unwrap();
    let low = read_memory_file(observe_sequence(dir.path(), "0.3")).unwrap();
    let high = read_memory_file(observe_sequence(dir.path(), "0.7")).unwrap();
    assert!(high.edge_count() >= low.edge_count());
}

#[test]
fn classify_against_empty_memory() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_sequence(dir.path()).remove(0);
    let missing = dir.path().join("none.json");
    let out = fsit(&["classify", "--memory", s(&missing), s(&scene)]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "scene_id,category,degree,similarity\n"
    );
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("unclassified"));
}

#[test]
fn classify_and_export_a_learned_memory() {
    let dir = tempfile::tempdir().unwrap();
    let memory = observe_sequence(dir.path(), "0.3");
    let scene = dir.path().join("e1.json");
    let csv = ok(fsit(&["classify", "--memory", s(&memory), s(&scene)]));
    assert!(csv.lines().any(|l| l.starts_with("e1,1,1.0,")), "{csv}");

    let dot = ok(fsit(&["export", "--memory", s(&memory)]));
    let nodes = dot
        .lines()
        .filter(|l| l.contains("[label=") && !l.contains("->"))
        .count();
    assert_eq!(nodes, 6);

    ok(fsit(&[
        "annotate",
        "--memory",
        s(&memory),
        "1",
        "two glasses",
    ]));
    let dot = ok(fsit(&["export", "--memory", s(&memory), "--reduce"]));
    assert!(dot.contains("two glasses"));
}

#[test]
fn sweep_classifies_more_at_higher_fuzziness() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    ok(fsit(&["sweep", "--preset", "unbalanced", "--out", s(&out)]));
    let grid = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(grid.starts_with("fuzziness,ix,iy,x,y,degree,similarity\n"));
    assert_eq!(grid.lines().count(), 1 + 2 * 2500);
    let classified = |a: &str| {
        grid.lines()
            .skip(1)
            .filter(|l| l.starts_with(&format!("{a},")))
            .filter(|l| l.split(',').nth(5).unwrap().parse::<f64>().unwrap() > 0.0)
            .count()
    };
    assert!(classified("0.9") > classified("0.1"));
    assert!(out.join("spec.json").exists());
    assert!(out.join("sweep_summary.csv").exists());
}

#[test]
fn sweep_is_reproducible_from_its_echoed_spec() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    ok(fsit(&[
        "sweep",
        "--fuzziness",
        "0.5",
        "--seed",
        "7",
        "--out",
        s(&first),
    ]));
    ok(fsit(&[
        "sweep",
        s(&first.join("spec.json")),
        "--out",
        s(&second),
    ]));
    let a = std::fs::read_to_string(first.join("sweep.csv")).unwrap();
    let b = std::fs::read_to_string(second.join("sweep.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scatter_writes_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scatter");
    ok(fsit(&["scatter", "--fuzziness", "0.3", "--out", s(&out)]));
    let text = std::fs::read_to_string(out.join("scatter.csv")).unwrap();
    assert!(text.starts_with("fuzziness,degree,similarity\n"));
    assert!(text.lines().count() > 1);
}

#[test]
fn bench_writes_timing_schema() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bench.json");
    std::fs::write(
        &spec,
        r#"{ "v_values": [2, 3], "w_values": [2], "scene_count": 5, "repetitions": 1 }"#,
    )
    .unwrap();
    let out = dir.path().join("bench");
    ok(fsit(&["bench", s(&spec), "--out", s(&out)]));
    let text = std::fs::read_to_string(out.join("bench.csv")).unwrap();
    assert!(text.starts_with("v,w,step,memory_size,learned,phase,ms\n"));
    // two phases per step, five steps, two configurations
    assert_eq!(text.lines().count(), 1 + 2 * 5 * 2);
}

#[test]
fn bad_settings_fail_with_a_diagnostic() {
    let out = fsit(&["sweep", "--fuzziness", "1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("fuzziness"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "elements": { "a": { "SPHERE": 2.0 } } }"#).unwrap();
    let out = fsit(&["classify", s(&bad)]);
    assert!(!out.status.success());
}

#[test]
fn environment_overrides_flags_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_sequence(dir.path()).remove(0);
    let out = dir.path().join("out");
    let run = Command::new(env!("CARGO_BIN_EXE_fsit"))
        .args(["observe", s(&scene)])
        .env("FSIT_FUZZINESS", "0.6")
        .env("FSIT_OUT", &out)
        .env_remove("FSIT_MEMORY")
        .output()
        .unwrap();
    ok(run);
    let memory = read_memory_file(out.join("memory.json")).unwrap();
    assert_eq!(memory.fuzziness(), 0.6);
}

#[test]
fn declared_interface_and_mode_are_kept() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("s.json");
    std::fs::write(
        &scene,
        r#"{
            "scene_id": "glass-cup",
            "interface": { "types": ["GLASS", "CUP"], "relations": [{ "name": "front" }], "mode": "full" },
            "elements": { "g1": { "GLASS": 0.8 }, "g2": { "CUP": 0.9 } },
            "facts": [["g1", "front", "g2", 0.9]]
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(fsit(&["observe", "--out", s(&out), s(&scene)]));
    let memory = read_memory_file(out.join("memory.json")).unwrap();
    assert_eq!(
        memory.interface().mode(),
        fsit_core::model::ReificationMode::Full
    );
    let keys: Vec<String> = memory
        .categories()
        .flat_map(|c| c.restrictions().map(|(k, _)| k.to_string()))
        .collect();
    assert_eq!(keys, ["front.GLASS.CUP"]);
}
