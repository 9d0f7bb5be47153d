use std::fs;
use std::process::Command;

fn voalab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_voalab"));
    c.env_remove("VOALAB_CACHE_DIR");
    c
}

fn code(c: &mut Command) -> i32 {
    c.output().expect("runs").status.code().expect("exit code")
}

#[test]
fn hypothesis_violation_exits_2() {
    assert_eq!(code(voalab().args(["verify", "zhu", "--mu", "1/2"])), 2);
    assert_eq!(code(voalab().args(["verify", "nonsense"])), 2);
    assert_eq!(code(voalab().args(["verify", "coset", "--max-weight", "1/3"])), 2);
    assert_eq!(code(voalab().args(["character", "--r", "1/2", "--max-weight", "-1"])), 2);
}

#[test]
fn passing_suite_exits_0_with_json() {
    let out = voalab().args(["verify", "coset", "--max-weight", "2", "--quiet"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let items = v["reports"][0]["items"].as_array().unwrap();
    assert!(items.iter().all(|i| i["status"] == "pass"));
}

#[test]
fn character_csv() {
    let out = voalab().args(["character", "--r", "1/2", "--max-weight", "1/2", "--window", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("weight,charge,dim"));
    assert!(text.contains("-1/2,-2,1"));
    assert!(text.contains("1/2,0,3"));
}

#[test]
fn config_file_and_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# characters only\nsuites = characters\nr = 1/2\ncutoff.characters = 3/2\nwindow = 3\n").unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let st = voalab().args(["verify", "characters", "--quiet", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
        assert_eq!(st.code(), Some(0));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn cache_hit_quarantine_and_gc() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = || {
        voalab()
            .args(["verify", "characters", "--max-weight", "1", "--window", "2", "--quiet"])
            .env("VOALAB_CACHE_DIR", &cache)
            .output()
            .unwrap()
    };
    let first = run();
    assert_eq!(first.status.code(), Some(0));
    let entries: Vec<_> = fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|x| x == "json")).collect();
    assert_eq!(entries.len(), 1);
    assert_eq!(run().stdout, first.stdout);

    // Corrupt the entry: it is quarantined and recomputed.
    let text = fs::read_to_string(&entries[0]).unwrap().replace("pass", "fail");
    fs::write(&entries[0], text).unwrap();
    let third = run();
    assert_eq!(third.stdout, first.stdout);
    assert!(cache.join("quarantine").read_dir().unwrap().count() == 1);

    let gc = voalab().args(["cache-gc", "--max-bytes", "0", "--cache-dir"]).arg(&cache).output().unwrap();
    assert_eq!(gc.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&gc.stdout).contains("evicted 1"));
    let empty = tempfile::tempdir().unwrap();
    let gc = voalab().args(["cache-gc", "--max-bytes", "0", "--cache-dir"]).arg(empty.path()).output().unwrap();
    assert!(String::from_utf8_lossy(&gc.stdout).starts_with("0 entries"));
}

#[test]
fn lowest_ls_lists_eij_entries() {
    let out = voalab().args(["lowest", "--module", "ls", "--window", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.as_array().unwrap().iter().any(|e| e["op"] == "e_a1" && e["source"] == serde_json::json!([0, 0]) && e["target"] == serde_json::json!([0, 1])));
}

#[test]
fn gc_refuses_while_locked() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".lock"), "").unwrap();
    fs::write(dir.path().join("x.json"), "{}").unwrap();
    let gc = voalab().args(["cache-gc", "--max-bytes", "0", "--cache-dir"]).arg(dir.path()).output().unwrap();
    assert_eq!(gc.status.code(), Some(1));
    assert!(dir.path().join("x.json").exists());
}
