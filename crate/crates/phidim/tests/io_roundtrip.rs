use phidim::io::{self, *};
use phidim::{execute, ExperimentConfig, RunOptions};
use phidim_core::dimfunc::{constant_df, from_spectrum_theta, max_interpolant, min_interpolant, CheckpointSequence};
use phidim_core::moran::{example1_spec, example2_spec, ExampleParams, MoranSpec};
use phidim_core::Scale;
use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Parse a body into `T` and write it again.
fn reemit<T: Serialize + DeserializeOwned>(body: &str) -> String {
    let rows: Vec<T> = read_csv(body).unwrap();
    csv_body(&rows).unwrap()
}

fn reemit_table(kind: &str, name: &str, body: &str) -> String {
    match (kind, name) {
        ("popcorn", "trace") => reemit::<BoxRow>(body),
        (_, "trace") => reemit::<ExampleRow>(body),
        (_, "formula") => reemit::<FormulaRow>(body),
        (_, "scan" | "scan-estimate") => reemit::<ScanRow>(body),
        (_, "ratios") => reemit::<RatioRow>(body),
        (_, "pairs") => reemit::<PairRow>(body),
        (_, "axioms") => reemit::<AxiomRow>(body),
        (_, "doubling") => reemit::<DoublingCsvRow>(body),
        (_, "points") => reemit::<PopcornRow>(body),
        (_, n) if n == "baseline" || n.starts_with("estimate") => reemit::<EstimateRow>(body),
        _ => panic!("no row type for {kind}/{name}"),
    }
}

const CONFIGS: &[&str] = &[
    r#"{"kind":"reproduce-example2","params":{"alpha":2}}"#,
    r#"{"kind":"reproduce-example2","params":{"alpha":3,"checkpoints":5}}"#,
    r#"{"kind":"reproduce-example1"}"#,
    r#"{"kind":"moran-formula","params":{"spec":{"d":1,"schedule":{"kind":"constant","params":{"r":0.25}}},"phi":{"kind":"spectrum","theta_prime":0.5},"levels":{"kind":"range","from":2,"to":40}}}"#,
    r#"{"kind":"moran-estimate","params":{"spec":{"d":1,"schedule":{"kind":"example2","params":{"alpha":2,"checkpoints":5}}},"phi":1,"grid":{"kind":"checkpoints","skip":1}}}"#,
    r#"{"kind":"dimfunc-check","params":{"phi":{"kind":"max-interpolant","points":[["0.5",1.0],["0.01",0.5],["2^-40",0.25]]},"random_scales":10}}"#,
    r#"{"kind":"variational"}"#,
    r#"{"kind":"rate-window"}"#,
    r#"{"kind":"equivalence-gap"}"#,
    r#"{"kind":"popcorn","params":{"t":1,"q_max":60,"radii":{"from":3,"to":6},"write_points":true}}"#,
];

#[test]
fn every_table_reemits_byte_equal() {
    for text in CONFIGS {
        let cfg = ExperimentConfig::parse(text).unwrap().config;
        let art = execute(&cfg, &RunOptions::default()).unwrap();
        assert!(!art.tables.is_empty(), "{text}");
        for t in &art.tables {
            let doc = Header::new(cfg.kind.name(), "00", 0).lines() + &t.body;
            let (_, body) = split_header(&doc);
            assert_eq!(reemit_table(cfg.kind.name(), &t.name, body), t.body, "{}/{}", cfg.kind.name(), t.name);
        }
        for d in &art.documents {
            let again = match d.name.as_str() {
                "schedule" => moran_to_json(&moran_from_json(&d.body).unwrap()) + "\n",
                "function" => dimfunc_to_json(&dimfunc_from_json(&d.body).unwrap()) + "\n",
                other => panic!("unknown document {other}"),
            };
            assert_eq!(again, d.body, "{}/{}", cfg.kind.name(), d.name);
        }
    }
}

#[test]
fn example_schedules_round_trip() {
    let params = ExampleParams { checkpoints: 5, ..ExampleParams::default() };
    let phi = constant_df(1.0).unwrap();
    let specs = [
        example2_spec(&params, &phi).unwrap(),
        example1_spec(&params, &constant_df(0.5).unwrap(), &phi).unwrap(),
        MoranSpec::constant(1, 1.0 / 3.0).unwrap(),
        MoranSpec::constant(2, 0.25).unwrap(),
    ];
    for spec in specs {
        let text = moran_to_json(&spec);
        let back = moran_from_json(&text).unwrap();
        assert_eq!(moran_to_json(&back), text);
        assert_eq!(back.blocks(), spec.blocks());
        assert_eq!(back.tail(), spec.tail());
        // Deep checkpoint radii are written to 11 significant digits.
        for (a, b) in back.checkpoints().iter().zip(spec.checkpoints()) {
            assert_eq!((a.level, &a.blocks, a.exact), (b.level, &b.blocks, b.exact));
            assert!((a.scale.depth() - b.scale.depth()).abs() <= 1e-10 * b.scale.depth());
        }
    }
}

#[test]
fn unmaterialized_schedule_is_rejected() {
    let err = moran_from_json(r#"{"d":1,"schedule":{"kind":"example2","params":{"alpha":2}}}"#).unwrap_err();
    assert!(err.to_string().contains("lists no ratios"), "{err}");
}

#[test]
fn deep_scales_survive_text() {
    for depth in [1e-3, 0.5, 30.0, 699.0, 701.0, 5e4, 1e9] {
        let s = Scale::from_depth(depth);
        let text = ScaleCell(s).to_string();
        let back: ScaleCell = text.parse().unwrap();
        assert_eq!(ScaleCell(back.0).to_string(), text);
        assert!((back.0.depth() - depth).abs() <= 1e-9 * depth.max(1.0), "{depth} -> {text} -> {}", back.0.depth());
    }
}

fn checkpoints() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (0.3f64..4.0, 0.05f64..3.0, prop::collection::vec((1.05f64..5.0, 0.02f64..1.0), 1..6)).prop_map(
        |(d0, t0, steps)| {
            let mut out = vec![(d0, t0)];
            for (m, u) in steps {
                let (d, t): (f64, f64) = *out.last().unwrap();
                let d1 = d * m;
                let floor = t * d / d1;
                out.push((d1, (floor + u * (t - floor)).min(t)));
            }
            out
        },
    )
}

proptest! {
    #[test]
    fn dimension_functions_round_trip(raw in checkpoints(), use_max in any::<bool>(), alpha in 0.1f64..10.0) {
        let seq = CheckpointSequence::new(raw.iter().map(|&(d, t)| (Scale::from_depth(d), t)).collect()).unwrap();
        let base = if use_max { max_interpolant(&seq) } else { min_interpolant(&seq) };
        for phi in [base.rate_window(alpha).unwrap(), base, from_spectrum_theta(0.25).unwrap()] {
            let text = dimfunc_to_json(&phi);
            let back = dimfunc_from_json(&text).unwrap();
            prop_assert_eq!(dimfunc_to_json(&back), text.clone());
            // Radii go through decimal text, so depths may move by an ulp;
            // stay just inside the domain and compare up to rounding.
            for &(d, _) in &raw {
                let s = Scale::from_depth(d * (1.0 + 1e-9));
                let (a, b) = (back.eval(s).unwrap(), phi.eval(s).unwrap());
                prop_assert!((a - b).abs() <= 1e-9 * b, "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn count_cells_round_trip(n in any::<u64>(), ln in 0.0f64..1e6) {
        let exact = CountCell(phidim_core::Count::from_u64(n));
        prop_assert_eq!(exact.to_string().parse::<CountCell>().unwrap().to_string(), exact.to_string());
        let big = CountCell(phidim_core::Count::from_ln(ln));
        prop_assert_eq!(big.to_string().parse::<CountCell>().unwrap().to_string(), big.to_string());
    }
}

#[test]
fn header_is_split_off() {
    let rows = vec![ScanRow { alpha: 0.5, value: None, tolerance: 0.0 }];
    let doc = csv_document(&Header::new("rate-window", "ab", 7), &rows).unwrap();
    assert!(doc.starts_with("# phidim "));
    assert!(doc.contains("# seed 7\n"));
    let back: Vec<ScanRow> = io::read_csv(&doc).unwrap();
    assert_eq!(back, rows);
}
