use pvlab_cli::report::validate;
use pvlab_cli::{run, run_with_env, EXIT_OK, EXIT_PARAM, EXIT_RESOURCE};
use serde_json::Value;

fn argv(args: &[&str]) -> Vec<String> {
    args.iter().map(|s| s.to_string()).collect()
}

fn json_of(args: &[&str]) -> Value {
    let out = run_with_env(&argv(args), |_| None);
    assert_eq!(out.code, EXIT_OK, "{args:?}: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("json")
}

fn value<'a>(v: &'a Value, path: &[&str]) -> &'a Value {
    path.iter().fold(v, |acc, k| &acc[*k])
}

#[test]
fn every_command_passes_the_provenance_validator() {
    let commands: &[&[&str]] = &[
        &["count", "--d", "1", "--k", "2", "--s", "2", "--N", "3"],
        &["count", "--linear", "--s", "2", "--N", "2,3"],
        &[
            "count", "--d", "1", "--k", "2", "--s", "2", "--N", "2..4", "--method", "brute",
        ],
        &["sums", "moment", "--d", "1", "--k", "2", "--N", "3", "--p", "4"],
        &[
            "sums", "moment", "--d", "1", "--k", "2", "--N", "3", "--p", "4", "--grid", "7,19",
        ],
        &["sums", "probe", "--N", "8", "--samples", "500", "--q", "4,6"],
        &["numerology", "report", "--p", "20"],
        &["numerology", "scan", "--r-max", "5", "--M-max", "5", "--ladder", "3"],
        &["numerology", "ball", "--l", "1", "--p", "20"],
        &["numerology", "table"],
        &[
            "transversality",
            "conjecture",
            "--l",
            "1",
            "--dims",
            "2,3",
            "--trials",
            "5",
        ],
        &["transversality", "appendix", "--trials", "20"],
        &[
            "transversality",
            "bl",
            "--random-points",
            "5",
            "--l",
            "1",
            "--samples",
            "20",
        ],
        &["transversality", "squares", "--K", "5", "--polys", "20"],
        &["report", "bounds", "--d", "2", "--k", "3", "--s", "10"],
        &["report", "bounds", "--d", "3", "--k", "5"],
    ];
    for cmd in commands {
        let v = json_of(cmd);
        assert_eq!(validate(&v), Vec::<String>::new(), "{cmd:?}");
    }
}

#[test]
fn exact_values_render_as_fractions() {
    let v = json_of(&["numerology", "report", "--p", "20"]);
    let text = serde_json::to_string(&v["results"]).unwrap();
    assert!(text.contains("\"21/20\""));
    assert!(text.contains("\"55/82\""));
}

#[test]
fn count_matches_known_values() {
    let v = json_of(&["count", "--d", "1", "--k", "2", "--s", "2", "--N", "3"]);
    assert_eq!(value(&v, &["results", "J", "value"]), "15");
    assert_eq!(value(&v, &["results", "J", "provenance"]), "exact-rational");
}

#[test]
fn csv_sweep_has_one_row_per_n() {
    let out = run_with_env(
        &argv(&[
            "count", "--d", "1", "--k", "2", "--s", "2", "--N", "2..5", "--format", "csv",
        ]),
        |_| None,
    );
    assert_eq!(out.code, EXIT_OK);
    let mut rdr = csv::Reader::from_reader(out.stdout.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let ns: Vec<String> = rdr
        .records()
        .map(|r| r.unwrap()[headers.iter().position(|h| h == "N").unwrap()].to_string())
        .collect();
    assert_eq!(ns, ["2", "3", "4", "5"]);
}

#[test]
fn csv_rejects_non_tabular_output() {
    let out = run_with_env(
        &argv(&["numerology", "ball", "--l", "1", "--p", "20", "--format", "csv"]),
        |_| None,
    );
    assert_eq!(out.code, EXIT_PARAM);
}

#[test]
fn text_output_is_readable() {
    let out = run_with_env(
        &argv(&["numerology", "ball", "--l", "1", "--p", "20", "--format", "text"]),
        |_| None,
    );
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("40/9"));
}

#[test]
fn parameter_errors_exit_two() {
    for cmd in [
        &["numerology", "report", "--p", "14"][..],
        &["sums", "probe", "--N", "8", "--c", "0.01"],
        &["count", "--d", "0", "--k", "2", "--s", "1", "--N", "2"],
        &["transversality", "conjecture", "--l", "3"],
        &["numerology", "report", "--p", "20", "--u", "1"],
        &["count", "--s", "2"],
        &["no-such-command"],
    ] {
        let out = run_with_env(&argv(cmd), |_| None);
        assert_eq!(out.code, EXIT_PARAM, "{cmd:?}");
        let v: Value = serde_json::from_str(&out.stdout).expect("error envelope");
        assert!(v["error"]["message"].is_string());
    }
}

#[test]
fn divergent_series_exit_two() {
    let out = run_with_env(&argv(&["numerology", "report", "--p", "16"]), |_| None);
    assert_eq!(out.code, EXIT_PARAM);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "divergent");
}

#[test]
fn resource_cap_exits_three() {
    let args = argv(&[
        "count",
        "--d",
        "2",
        "--k",
        "3",
        "--s",
        "3",
        "--N",
        "10",
        "--mem-cap",
        "1K",
    ]);
    assert_eq!(run_with_env(&args, |_| None).code, EXIT_RESOURCE);
    let args = argv(&["count", "--d", "2", "--k", "3", "--s", "3", "--N", "10"]);
    let env = |k: &str| (k == "PVLAB_MEM_CAP").then(|| "1K".to_string());
    assert_eq!(run_with_env(&args, env).code, EXIT_RESOURCE);
}

#[test]
fn flags_override_environment() {
    let env = |k: &str| match k {
        "PVLAB_THREADS" => Some("3".to_string()),
        "PVLAB_MEM_CAP" => Some("1K".to_string()),
        _ => None,
    };
    let out = run_with_env(
        &argv(&[
            "count",
            "--linear",
            "--s",
            "1",
            "--N",
            "3",
            "--threads",
            "2",
            "--mem-cap",
            "1M",
        ]),
        env,
    );
    assert_eq!(out.code, EXIT_OK);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["config"]["threads"], "2");
    assert_eq!(v["config"]["mem_cap_bytes"], (1u64 << 20).to_string());
    let out = run_with_env(&argv(&["count", "--linear", "--s", "1", "--N", "3"]), env);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["config"]["threads"], "3");
    let bad = |k: &str| (k == "PVLAB_THREADS").then(|| "many".to_string());
    assert_eq!(run_with_env(&argv(&["numerology", "table"]), bad).code, EXIT_PARAM);
}

#[test]
fn reports_round_trip_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&argv(&["report", "bounds", "--d", "2", "--k", "3", "--s", "4"]));
    std::fs::write(&path, &out.stdout).unwrap();
    let reparsed: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(serde_json::to_string_pretty(&reparsed).unwrap() + "\n", out.stdout);
    let ok = run(&argv(&["report", "validate", path.to_str().unwrap()]));
    assert_eq!(ok.code, EXIT_OK);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"config": {}, "results": {"J": 15}}"#).unwrap();
    assert_eq!(
        run(&argv(&["report", "validate", bad.to_str().unwrap()])).code,
        EXIT_PARAM
    );
}

#[test]
fn bl_reads_points_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.json");
    std::fs::write(
        &path,
        r#"{"points": [["1/7","2/7"],["1/3","1/5"],["4/5","1/9"],["1/2","5/6"],["2/3","2/3"],[0,1]]}"#,
    )
    .unwrap();
    let v = json_of(&[
        "transversality",
        "bl",
        "--points",
        path.to_str().unwrap(),
        "--l",
        "2",
        "--samples",
        "30",
    ]);
    assert!(validate(&v).is_empty());
    assert_eq!(v["flags"]["no_violations"], true);

    std::fs::write(
        &path,
        r#"{"points": [["3/2","0"],["0","0"],["0","0"],["0","0"],["0","0"]]}"#,
    )
    .unwrap();
    let out = run(&argv(&[
        "transversality",
        "bl",
        "--points",
        path.to_str().unwrap(),
        "--l",
        "1",
    ]));
    assert_eq!(out.code, EXIT_PARAM);
}

#[test]
fn same_seed_same_report() {
    let args = argv(&["sums", "probe", "--N", "8", "--samples", "300", "--seed", "5"]);
    let a = pvlab_cli::without_timing(&run_with_env(&args, |_| None).stdout);
    let b = pvlab_cli::without_timing(&run_with_env(&args, |_| None).stdout);
    assert_eq!(a, b);
    let other = argv(&["sums", "probe", "--N", "8", "--samples", "300", "--seed", "6"]);
    let c = pvlab_cli::without_timing(&run_with_env(&other, |_| None).stdout).unwrap();
    assert_ne!(a.unwrap()["results"], c["results"]);
}

#[test]
fn help_exits_zero() {
    let out = run_with_env(&argv(&["--help"]), |_| None);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("numerology"));
}
