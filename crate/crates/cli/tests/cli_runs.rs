use std::process::{Command, Output};

fn mera(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mera")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn exit_codes_distinguish_usage_and_feasibility() {
    assert_eq!(code(&mera(&["schedule", "--epsilon", "0.3"])), 0);
    assert_eq!(code(&mera(&["schedule"])), 2);
    assert_eq!(code(&mera(&["schedule", "--epsilon", "zero"])), 2);
    assert_eq!(code(&mera(&["entropy", "--epsilon", "0.08", "--interval", "3:6"])), 3);
    assert_eq!(code(&mera(&["nonsense"])), 2);
}

#[test]
fn memory_cap_can_be_lowered_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_mera"))
        .env("MERA_MEMORY_CAP", "100")
        .args(["entropy", "--epsilon", "0.3", "--interval", "0:1", "--trials", "2"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap of 100"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# sweep\ncommand = schedule\nepsilon = 0.3\nleaf-dim = 3\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = mera(&["schedule", "--config", cfg]);
    let overridden = mera(&["schedule", "--config", cfg, "--leaf-dim", "2"]);
    let direct = mera(&["schedule", "--epsilon", "0.3"]);
    assert_eq!(code(&from_file), 0);
    assert_ne!(from_file.stdout, direct.stdout);
    assert_eq!(overridden.stdout, direct.stdout);

    std::fs::write(dir.path().join("bad.conf"), "epsilon = 0.3\nwidth = 4\n").unwrap();
    let bad = mera(&["schedule", "--config", dir.path().join("bad.conf").to_str().unwrap()]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("`width`"));
}

#[test]
fn bits_are_nats_over_ln2() {
    let nats = mera(&["cuts", "--interval", "5:12"]);
    let bits = mera(&["cuts", "--interval", "5:12", "--units", "bits"]);
    let row = |o: &Output| -> Vec<f64> {
        let text = String::from_utf8(o.stdout.clone()).unwrap();
        let line = text.lines().nth(1).unwrap().to_string();
        line.split(',').skip(1).map(|x| x.parse().unwrap()).collect()
    };
    let (n, b) = (row(&nats), row(&bits));
    for (x, y) in n.iter().zip(&b).take(4) {
        assert!((x / std::f64::consts::LN_2 - y).abs() < 1e-12);
    }
}

#[test]
fn argmin_file_replays_to_the_reported_cost() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("argmin.json");
    let o = mera(&["cuts", "--epsilon", "0.15", "--interval", "5:12", "--emit-argmin", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let net = mera_core::network::MeraNetwork::new(mera_core::schedule::solve_schedule(2, 0.15).unwrap());
    let seq = mera_core::cutbounds::ReductionSequence::from_json(&net, &std::fs::read_to_string(&path).unwrap()).unwrap();
    let csv = String::from_utf8(o.stdout).unwrap();
    let min_cost: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((seq.replay(&net).unwrap() - min_cost).abs() < 1e-12);
}

#[test]
fn schedule_network_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let o = mera(&["schedule", "--epsilon", "0.2", "--network-json", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let net = mera_core::network::MeraNetwork::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(net.levels(), 4);
}

#[test]
fn fuzz_seeds_are_accepted_inputs() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let read = |dir: &str| -> Vec<String> {
        let mut files: Vec<_> = std::fs::read_dir(root.join(dir)).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| std::fs::read_to_string(p).unwrap()).collect()
    };
    for text in read("config_file") {
        mera_cli::parse_config_file(&text).unwrap();
    }
    for text in read("network_json") {
        mera_core::network::MeraNetwork::from_json(&text).unwrap();
    }
    let net = mera_core::network::MeraNetwork::new(mera_core::schedule::solve_schedule(2, 0.15).unwrap());
    for text in read("argmin_json") {
        mera_core::cutbounds::ReductionSequence::from_json(&net, &text).unwrap();
    }
    let values = read("cli_values");
    assert!(values.iter().all(|v| {
        mera_cli::parse::parse_interval(v).is_ok()
            || mera_cli::parse::parse_list::<u64>(v).is_ok()
            || mera_cli::parse::parse_specs(v).is_ok()
    }));
}
