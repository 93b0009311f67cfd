use std::collections::BTreeSet;
use std::process::Command;

use rsma_sim::runner::*;
use rsma_sim::schemes::Scheme;
use rsma_sim::Error;

const BIN: &str = env!("CARGO_BIN_EXE_rsma-sim");

fn tmpdir(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("rsma-sim-test-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn empty_config_is_the_standard_cell() {
    let cfg = load_config("").unwrap();
    assert_eq!(cfg, SystemConfig::default());
    assert_eq!(
        (cfg.antennas, cfg.groups, cfg.users, cfg.m_bar),
        (100, 4, 3, 6)
    );
    assert_eq!((cfg.delta, cfg.eta, cfg.alpha), (4e4, 2.5, 0.7));
    assert_eq!(cfg.user_distances_m, vec![200.0, 170.0, 140.0]);
    let p = cfg.power_allocation();
    assert!(p.beta.iter().all(|b| (b - 0.1).abs() < 1e-15));
    assert_eq!(cfg.snr_db.first(), Some(&0.0));
    assert_eq!(cfg.snr_db.last(), Some(&32.0));
    assert_eq!(cfg.snr_db.len(), 17);
    assert_eq!((cfg.trials_outage, cfg.trials_ergodic), (100_000, 20_000));
    assert_eq!(parse_config("{}").unwrap(), cfg);
}

#[test]
fn too_many_users_is_infeasible() {
    let text = r#"{"users": 8, "user_distances_m": [150,150,150,150,150,150,150,150], "rate_private": [1,1,1,1,1,1,1,1]}"#;
    match load_config(text) {
        Err(e @ Error::Infeasible(_)) => {
            let msg = e.to_string();
            assert!(msg.contains("M_bar/2 > U - 1"), "{msg}");
            assert!(msg.contains("3 <= 7"), "{msg}");
            assert_eq!(e.exit_code(), 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_fields_are_named() {
    for (text, field) in [
        (r#"{"alpha": "lots"}"#, "alpha"),
        (r#"{"snr_db": [0, "x"]}"#, "snr_db"),
        (r#"{"impairments": [{"chi": true}]}"#, "impairments"),
        (r#"{"m_bar": -6}"#, "m_bar"),
        (r#"{"bogus": 1}"#, "bogus"),
    ] {
        match parse_config(text) {
            Err(Error::Config(msg)) => assert!(msg.contains(field), "{text}: {msg}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(parse_config("{"), Err(Error::Json(_))));
    assert!(matches!(
        load_config("/nonexistent/cfg.json"),
        Err(Error::Io(_))
    ));
    let bad = SystemConfig {
        antennas: 7,
        ..SystemConfig::default()
    };
    assert!(matches!(check(&bad), Err(Error::Config(_))));
    let bad = SystemConfig {
        rate_private: vec![1.0],
        ..SystemConfig::default()
    };
    assert!(matches!(check(&bad), Err(Error::Config(m)) if m.contains("rate_private")));
}

#[test]
fn overrides() {
    let base = SystemConfig::default();
    let cfg = apply_overrides(
        &base,
        &[
            "seed=42".into(),
            "snr_db=[10,20]".into(),
            "schemes=[\"pdiv\",\"sp-noma\"]".into(),
            "impairments=[{\"chi\":0.1,\"xi\":0.0,\"csi_error\":0.0}]".into(),
        ],
    )
    .unwrap();
    assert_eq!(cfg.seed, 42);
    assert_eq!(cfg.snr_db, vec![10.0, 20.0]);
    assert_eq!(cfg.schemes, vec![Scheme::Pdiv, Scheme::SpNoma]);
    assert_eq!(cfg.impairments[0].chi, 0.1);
    assert!(matches!(
        apply_overrides(&base, &["seed".into()]),
        Err(Error::Config(_))
    ));
    assert!(
        matches!(apply_overrides(&base, &["alpha=high".into()]), Err(Error::Config(m)) if m.contains("alpha"))
    );
    assert!(matches!(
        apply_overrides(&base, &["seed.x=1".into()]),
        Err(Error::Config(_))
    ));
}

#[test]
fn presets_resolve() {
    assert_eq!(PRESETS.len(), 15);
    for p in PRESETS {
        let cfg = preset_config(p).unwrap();
        check(&cfg).unwrap_or_else(|e| panic!("{p}: {e}"));
        assert!(describe(p).is_some());
    }
    assert!(matches!(preset_config("nope"), Err(Error::Unknown { .. })));
    let c = preset_config("outage-pdiv-xi").unwrap();
    assert_eq!(c.schemes, vec![Scheme::Pdiv]);
    let xis: Vec<f64> = c.impairments.iter().map(|i| i.xi).collect();
    assert_eq!(xis, vec![0.0, 0.01, 0.05]);
    assert!(c.impairments.iter().all(|i| i.chi == 0.001));
    let c = preset_config("outage-pmux-ideal").unwrap();
    assert!(c.impairments.iter().all(|i| i.chi == 0.0));
    assert_eq!(c.rate_private, vec![0.1, 0.5, 1.2]);
}

fn row(source: &str, value: f64) -> ResultRow {
    ResultRow {
        scheme: "pmux".into(),
        group: 0,
        user: "1".into(),
        snr_db: 12.0,
        chi: 0.001,
        xi: 0.0,
        csi_error: 0.0,
        metric: "outage_total".into(),
        source: source.into(),
        value,
        std_error: 0.0,
        trials: 0,
        seed: 0,
    }
}

#[test]
fn csv_layout() {
    let cfg = SystemConfig::default();
    let text = to_csv_string(&[row("analytic", 0.1 + 0.2)], &cfg).unwrap();
    let lines: Vec<&str> = text.split('\n').collect();
    assert!(lines[0].starts_with("# config={"));
    assert_eq!(lines[1], CSV_HEADER);
    assert_eq!(
        lines[2],
        "pmux,0,1,12.0,0.001,0.0,0.0,outage_total,analytic,0.30000000000000004,0.0,0,0"
    );
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3], "");
    assert!(!text.contains('\r'));
    assert_eq!(
        from_csv_str(&text).unwrap(),
        vec![row("analytic", 0.1 + 0.2)]
    );
    assert_eq!(config_from_csv_str(&text).unwrap(), cfg);
    assert!(from_csv_str("a,b\n1,2\n").is_err());
}

#[test]
fn json_round_trip_and_sidecar() {
    let dir = tmpdir("json");
    let path = dir.join("rows.json");
    let cfg = SystemConfig {
        seed: 5,
        ..SystemConfig::default()
    };
    let rows = vec![row("analytic", 1e-300), row("mc", 0.123_456_789_012_345_67)];
    emit_results(&rows, &cfg, Format::Json, &path).unwrap();
    assert_eq!(read_json(&path).unwrap(), rows);
    let side = std::fs::read_to_string(sidecar_path(&path)).unwrap();
    assert_eq!(parse_config(&side).unwrap(), cfg);
    assert!(matches!(
        emit_results(&[], &cfg, Format::Json, &path),
        Err(Error::Config(_))
    ));
    assert!("xml".parse::<Format>().is_err());
    std::fs::remove_dir_all(dir).ok();
}

fn quick(mut cfg: SystemConfig) -> SystemConfig {
    cfg.snr_db = vec![10.0];
    cfg.trials_outage = 64;
    cfg.trials_ergodic = 64;
    cfg
}

/// Every (label, user, metric, source, point) a config should produce.
fn expected(cfg: &SystemConfig) -> BTreeSet<(String, String, String, String, String)> {
    let mut out = BTreeSet::new();
    let users: Vec<String> = (0..cfg.users).map(|u| u.to_string()).collect();
    for imp in &cfg.impairments {
        for snr in &cfg.snr_db {
            let point = format!("{snr}/{}/{}/{}", imp.chi, imp.xi, imp.csi_error);
            let mut put = |l: &str, u: &str, m: &str, s: &str| {
                out.insert((l.into(), u.into(), m.into(), s.into(), point.clone()));
            };
            for &s in &cfg.schemes {
                let tag = s.tag();
                let two = matches!(s, Scheme::Spmux | Scheme::DpSdmaMux);
                let labels: Vec<String> = if two {
                    vec![format!("{tag}-v"), format!("{tag}-h")]
                } else {
                    vec![tag.into()]
                };
                let analytic = matches!(s, Scheme::Pmux | Scheme::Pdiv | Scheme::Spmux);
                let mut sources = vec![];
                if cfg.sources.contains(&Source::Mc) {
                    sources.push("mc");
                }
                for src in sources.iter().copied().chain(
                    cfg.sources
                        .contains(&Source::Analytic)
                        .then_some("analytic"),
                ) {
                    if src == "analytic" && !analytic {
                        continue;
                    }
                    if cfg.analyses.contains(&Analysis::Outage) {
                        for l in &labels {
                            for u in &users {
                                if s.is_rsma() {
                                    put(l, u, "outage_common", src);
                                    put(l, u, "outage_private", src);
                                }
                                put(l, u, "outage_total", src);
                            }
                            if two {
                                put(l, "sum", "outage_sum_rate", src);
                            }
                        }
                        put(tag, "sum", "outage_sum_rate", src);
                    }
                    if cfg.analyses.contains(&Analysis::Ergodic)
                        && !(src == "analytic" && s == Scheme::Spmux)
                    {
                        if s.is_rsma() {
                            put(tag, "sum", "ergodic_common", src);
                            put(tag, "sum", "ergodic_private", src);
                        }
                        put(tag, "sum", "ergodic_sum", src);
                    }
                }
            }
        }
    }
    out
}

#[test]
fn presets_cover_every_curve() {
    for p in PRESETS {
        let cfg = quick(preset_config(p).unwrap());
        let rows = run_config(&cfg, 4).unwrap();
        let mut got = BTreeSet::new();
        for r in &rows {
            let key = (
                r.scheme.clone(),
                r.user.clone(),
                r.metric.clone(),
                r.source.clone(),
                format!("{}/{}/{}/{}", r.snr_db, r.chi, r.xi, r.csi_error),
            );
            assert!(got.insert(key), "{p}: duplicate row {r:?}");
            assert!(r.value.is_finite() && r.std_error >= 0.0);
            if r.source == "analytic" {
                assert_eq!((r.std_error, r.trials, r.seed), (0.0, 0, 0));
            } else {
                assert_eq!((r.trials, r.seed), (64, cfg.seed));
            }
            if r.metric.starts_with("outage_") && r.metric != "outage_sum_rate" {
                assert!((0.0..=1.0).contains(&r.value));
            }
        }
        assert_eq!(got, expected(&cfg), "{p}");
    }
}

#[test]
fn preset_overrides_apply() {
    let (cfg, rows) = run_preset(
        "outage-pmux-ideal",
        &[
            "snr_db=[6]".into(),
            "trials_outage=32".into(),
            "sources=[\"mc\"]".into(),
        ],
        2,
    )
    .unwrap();
    assert_eq!(cfg.snr_db, vec![6.0]);
    assert!(rows
        .iter()
        .all(|r| r.source == "mc" && r.trials == 32 && r.snr_db == 6.0));
    assert!(matches!(
        run_preset("unknown", &[], 1),
        Err(Error::Unknown { .. })
    ));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(BIN)
        .args(args)
        .env("RSMA_SIM_WORKERS", "3")
        .output()
        .unwrap()
}

#[test]
fn cli_runs_are_byte_identical_and_rerunnable() {
    let dir = tmpdir("cli");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    let args = |p: &std::path::Path| {
        vec![
            "run".to_string(),
            "--preset".into(),
            "outage-pdiv-xi".into(),
            "--override".into(),
            "snr_db=[4,14]".into(),
            "--trials".into(),
            "300".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    let run = |p: &std::path::Path, w: &str| {
        let mut v = args(p);
        v.extend(["--workers".to_string(), w.to_string()]);
        let o = Command::new(BIN).args(&v).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&a, "1");
    run(&b, "6");
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());

    // the embedded config reproduces the table
    let text = String::from_utf8(ta).unwrap();
    let cfg = config_from_csv_str(&text).unwrap();
    assert_eq!(cfg.seed, 11);
    let rows = run_config(&cfg, 2).unwrap();
    assert_eq!(from_csv_str(&text).unwrap(), rows);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn cli_surface() {
    let o = cli(&["list-presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for p in PRESETS {
        assert!(text.lines().any(|l| l.starts_with(p)), "{p}");
    }
    let o = cli(&["validate", "--preset", "ergodic-all-ma"]);
    assert!(o.status.success());
    let o = cli(&["validate", "--config", r#"{"users": 8}"#]);
    assert_eq!(o.status.code(), Some(2));
    let o = cli(&["validate", "--preset", "missing"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cli(&["run", "--config", r#"{"alpha": "x"}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));

    let o = cli(&[
        "run",
        "--override",
        "snr_db=[10]",
        "--override",
        "sources=[\"analytic\"]",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let rows: Vec<ResultRow> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.len(), 3 * 3 + 1);
    assert!(rows
        .iter()
        .all(|r| r.source == "analytic" && r.std_error == 0.0));
}
