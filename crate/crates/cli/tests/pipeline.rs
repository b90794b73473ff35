mod common;

use std::fs;
use std::process::Command;

use common::{files_with_ext, Fixture, SMALL_TRAINING};
use restore_cli::pipeline::{
    cmd_embed, cmd_extract, cmd_reconstruct, cmd_report, cmd_semantic, EmbedIndex, ExtractStats, ReconCellFile,
    SemanticIndex,
};
use restore_cli::report::{validate_run_result, RunResult};
use restore_cli::{run_all, CliError};
use restore_core::ingest::read_graph_file;

fn read<T: serde::de::DeserializeOwned>(p: std::path::PathBuf) -> T {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const STAR_PLUS: &[(&str, &str)] = &[("hub", "a"), ("hub", "b"), ("a", "x"), ("b", "y"), ("y", "z")];

#[test]
fn one_center_two_hops_gives_two_files_and_stats() {
    let f = Fixture::new(STAR_PLUS);
    let cfg = f.config("center = /c/en/hub\nhops = 1,2\n", "out");
    let o = cmd_extract(&cfg).unwrap();
    assert_eq!((o.succeeded, o.failed), (2, 0));
    let dir = cfg.output_dir.join("subgraphs");
    assert_eq!(files_with_ext(&dir, ".tsv").len(), 2);
    let stats: ExtractStats = read(dir.join("stats.json"));
    assert_eq!(stats.per_hop.len(), 2);
    assert_eq!(stats.per_hop[0].nodes.min, 3);
    assert_eq!(stats.per_hop[1].nodes.max, 5);
    assert_eq!(stats.graph.node_count, 6);
}

#[test]
fn isolated_center_gives_a_single_node_file() {
    let f = Fixture::new(STAR_PLUS);
    f.file("graph.tsv", &(fs::read_to_string(f.path("graph.tsv")).unwrap() + "/c/en/alone\t/r/IsA\t/c/en/alone\n"));
    let cfg = f.config("center = /c/en/alone\nhops = 1\n", "out");
    cmd_extract(&cfg).unwrap();
    let files = files_with_ext(&cfg.output_dir.join("subgraphs"), ".tsv");
    let g = read_graph_file(&cfg.output_dir.join("subgraphs").join(&files[0])).unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (1, 0));
    let stats: ExtractStats = read(cfg.output_dir.join("subgraphs/stats.json"));
    assert_eq!(stats.per_hop[0].nodes.min, 1);
}

#[test]
fn extract_rerun_is_byte_identical() {
    let f = Fixture::new(STAR_PLUS);
    let a = f.config("center = /c/en/hub\ncenter = /c/en/y\n", "a");
    let b = f.config("center = /c/en/hub\ncenter = /c/en/y\n", "b");
    cmd_extract(&a).unwrap();
    cmd_extract(&b).unwrap();
    let files = files_with_ext(&a.output_dir.join("subgraphs"), "");
    assert!(files.len() >= 6 + 2);
    for name in files.iter().filter(|n| *n != "timings.json") {
        let x = fs::read(a.output_dir.join("subgraphs").join(name)).unwrap();
        let y = fs::read(b.output_dir.join("subgraphs").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn unresolved_centers_are_recorded_and_the_run_continues() {
    let f = Fixture::new(STAR_PLUS);
    let cfg = f.config("center = /c/en/hub\ncenter = /c/en/nowhere\nhops = 1\n", "out");
    let o = cmd_extract(&cfg).unwrap();
    assert_eq!((o.succeeded, o.failed), (1, 1));
    let idx: serde_json::Value = read(cfg.output_dir.join("subgraphs/index.json"));
    assert_eq!(idx["errors"][0]["center"], "/c/en/nowhere");
}

#[test]
fn five_algorithms_three_hops_give_fifteen_embeddings() {
    let f = Fixture::new(STAR_PLUS);
    let cfg = f.config(&format!("center = /c/en/hub\n{SMALL_TRAINING}"), "out");
    cmd_extract(&cfg).unwrap();
    let o = cmd_embed(&cfg).unwrap();
    assert_eq!((o.succeeded, o.failed), (15, 0));
    assert_eq!(files_with_ext(&cfg.output_dir.join("embeddings"), ".emb").len(), 15);
}

#[test]
fn dimensions_follow_the_schedule_with_clamping() {
    // a -> b -> c: every hop sees the same 3 nodes
    let f = Fixture::new(&[("a", "b"), ("b", "c")]);
    let cfg = f.config(&format!("center = /c/en/b\nhops = 1,2\n{SMALL_TRAINING}"), "out");
    cmd_extract(&cfg).unwrap();
    cmd_embed(&cfg).unwrap();
    let idx: EmbedIndex = read(cfg.output_dir.join("embeddings/index.json"));
    for e in &idx.entries {
        match e.hop {
            1 => assert_eq!((e.requested_dim, e.effective_dim), (2, 2)),
            _ => assert_eq!((e.requested_dim, e.effective_dim), (64, 2)),
        }
    }
}

#[test]
fn perfect_recovery_has_full_map_no_diff_and_no_red_edges() {
    let f = Fixture::new(&[("a", "b"), ("b", "c"), ("a", "c"), ("c", "d"), ("d", "e")]);
    let mut cfg = f.config("center = /c/en/c\nhops = 2\nalgorithm = hope\ndim.2 = 4\n", "out");
    cfg.dot = true;
    cmd_extract(&cfg).unwrap();
    cmd_embed(&cfg).unwrap();
    cmd_reconstruct(&cfg).unwrap();
    let dir = cfg.output_dir.join("reconstruction");
    let cell: ReconCellFile = read(dir.join("c0000_h2_hope.json"));
    assert_eq!(cell.report.node_count, 5);
    assert!(cell.report.map_score >= 0.99, "{}", cell.report.map_score);
    assert!(cell.report.diff.is_empty(), "{:?}", cell.report.diff);
    let dot = fs::read_to_string(dir.join("c0000_h2_hope.dot")).unwrap();
    assert!(dot.contains("cluster_reconstructed"));
    assert!(!dot.contains("red"));
}

#[test]
fn semantic_reports_count_skipped_pairs() {
    let f = Fixture::new(&[("cat", "dog"), ("dog", "pet"), ("pet", "cat"), ("car", "road"), ("road", "cat")]);
    f.file("sim.tsv", "cat\tdog\t8\ncar\troad\t6\nunicorn\tcat\t1\n");
    let body = format!("center = /c/en/cat\nhops = 1,2\nalgorithm = lap, hope\nsimilarity.toy = sim.tsv\n{SMALL_TRAINING}");
    let cfg = f.config(&body, "out");
    run_all(&cfg).unwrap();
    let idx: SemanticIndex = read(cfg.output_dir.join("semantic/reports.json"));
    assert_eq!(idx.cells.len(), 4);
    assert_eq!(idx.averages.len(), 4);
    // car is two hops from cat; unicorn is not in the graph
    for c in &idx.cells {
        assert_eq!(c.report.pairs_evaluated + c.report.pairs_skipped, 3);
        assert_eq!(c.report.pairs_skipped, if c.hop == 1 { 2 } else { 1 });
        assert!(c.report.mean_distance > 0.0);
    }
}

#[test]
fn report_has_one_csv_row_per_algorithm_and_hop_and_validates() {
    let f = Fixture::new(STAR_PLUS);
    let body = format!("center = /c/en/hub\ncenter = /c/en/b\nhops = 1,2\n{SMALL_TRAINING}");
    let cfg = f.config(&body, "out");
    let o = run_all(&cfg).unwrap();
    assert_eq!(o.failed, 0);
    let dir = cfg.output_dir.join("report");
    let csv = fs::read_to_string(dir.join("reconstruction.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "GE Algorithm,Hop,mAP,Prec@0.1,Prec@0.2,Prec@0.4,Prec@0.6,Prec@0.8,Prec@1.0"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[0].starts_with("Node2Vec,1-hop,"));
    assert!(rows[3].starts_with("HOPE,2-hop,"));

    let text = fs::read_to_string(dir.join("run_result.json")).unwrap();
    let r = validate_run_result(&text).unwrap();
    assert_eq!(r.reconstruction.len(), 2 * 2 * 5);
    assert_eq!(serde_json::to_value(&r).unwrap(), serde_json::from_str::<serde_json::Value>(&text).unwrap());
    for key in ["extract", "embed", "reconstruct", "semantic"] {
        assert!(r.timing.contains_key(key), "{key}");
    }
    assert_eq!(r.timing["embed"].len(), 20);
    assert_eq!(r.timing["reconstruct"].len(), 20);

    let mut broken: RunResult = r.clone();
    broken.reconstruction[0].error = Some("x".into());
    assert!(validate_run_result(&serde_json::to_string(&broken).unwrap()).is_err());
    let mut broken = r;
    broken.schema_version = 99;
    assert!(validate_run_result(&serde_json::to_string(&broken).unwrap()).is_err());
}

#[test]
fn report_without_earlier_stages_lists_missing_inputs() {
    let f = Fixture::new(STAR_PLUS);
    let cfg = f.config("center = /c/en/hub\n", "out");
    match cmd_report(&cfg) {
        Err(CliError::MissingInputs(m)) => {
            assert_eq!(m.len(), 5);
            assert!(m[0].ends_with("subgraphs/index.json"));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(cmd_embed(&cfg), Err(CliError::MissingInputs(_))));
    assert!(matches!(cmd_semantic(&cfg), Err(CliError::MissingInputs(_))));
}

#[test]
fn max_nodes_failures_stay_in_their_cells() {
    let f = Fixture::new(STAR_PLUS);
    let body = format!("center = /c/en/hub\nhops = 1,3\nmax_nodes = 4\nalgorithm = lap\n{SMALL_TRAINING}");
    let cfg = f.config(&body, "out");
    let o = run_all(&cfg).unwrap();
    assert_eq!(o.failed, 1);
    let r: RunResult = read(cfg.output_dir.join("report/run_result.json"));
    let failed: Vec<_> = r.reconstruction.iter().filter(|c| c.error.is_some()).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].hop, 3);
    assert!(failed[0].error.as_ref().unwrap().contains("max_nodes"));
    assert_eq!(r.tables.reconstruction.len(), 1);
}

#[test]
fn resume_keeps_existing_embeddings() {
    let f = Fixture::new(STAR_PLUS);
    let mut cfg = f.config(&format!("center = /c/en/hub\nhops = 1\nalgorithm = sdne\n{SMALL_TRAINING}"), "out");
    cmd_extract(&cfg).unwrap();
    cmd_embed(&cfg).unwrap();
    let p = cfg.output_dir.join("embeddings/c0000_h1_sdne.emb");
    let before = fs::metadata(&p).unwrap().modified().unwrap();
    std::thread::sleep(std::time::Duration::from_millis(20));
    cfg.resume = true;
    cmd_embed(&cfg).unwrap();
    assert_eq!(fs::metadata(&p).unwrap().modified().unwrap(), before);
}

fn restore(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_restore"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

#[test]
fn exit_codes() {
    let f = Fixture::new(STAR_PLUS);
    let out = f.path("out");
    let out = out.to_str().unwrap();

    let m = f.manifest(&format!("center = /c/en/hub\nhops = 1\nalgorithm = lap\n{SMALL_TRAINING}"));
    let ok = restore(&["run-all", "--config", m.to_str().unwrap(), "--output", out]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let m = f.manifest("center = /c/en/hub\ncenter = /c/en/nowhere\nhops = 1\nalgorithm = lap\n");
    let partial = restore(&["run-all", "--config", m.to_str().unwrap(), "--output", out]);
    assert_eq!(partial.status.code(), Some(3));

    let m = f.manifest("center = /c/en/nowhere\nhops = 1\n");
    let total = restore(&["extract", "--config", m.to_str().unwrap(), "--output", out]);
    assert_eq!(total.status.code(), Some(2));

    assert_eq!(restore(&["run-all"]).status.code(), Some(1));
    let m = f.manifest("center = /c/en/hub\nbogus = 1\n");
    assert_eq!(restore(&["extract", "--config", m.to_str().unwrap()]).status.code(), Some(1));
    let bad = restore(&["extract", "--config", m.to_str().unwrap(), "--format", "xml"]);
    assert_eq!(bad.status.code(), Some(1));
}
