mod common;

use git2::Repository;

use common::{commit, years, T0};
use maintlens::extractor::extract_methods;
use maintlens::history::{HistoryError, TraceOptions, Tracer};

const A_V0: &str = "class A {
    int foo(int x) {
        return x;
    }

    int bar() {
        return 0;
    }
}
";

const A_V1: &str = "class A {
    int foo(int x) {
        return x + 1;
    }

    int bar() {
        return 0;
    }
}
";

const A_V2: &str = "class A {
    int foo(int x) {
        return x + 1;
    }

    int bar() {
        return 1;
    }
}
";

const A_V3: &str = "class A {
    int bar() {
        return 1;
    }
}
";

const A_V4: &str = "class A {
    int bar() {
        int b = 1;
        return b;
    }
}
";

fn lifecycle_repo() -> (tempfile::TempDir, Vec<git2::Oid>) {
    let dir = tempfile::tempdir().unwrap();
    let repo = Repository::init(dir.path()).unwrap();
    let f = "A.java";
    let commits = vec![
        commit(&repo, &[(f, Some(A_V0))], "start", T0),
        commit(&repo, &[(f, Some(A_V1))], "tune foo", T0 + years(1.0)),
        commit(&repo, &[(f, Some(A_V2))], "fix bug in bar", T0 + years(2.0)),
        commit(&repo, &[(f, Some(A_V3))], "drop foo", T0 + years(3.0)),
        commit(&repo, &[(f, Some(A_V4))], "tidy bar", T0 + years(4.0)),
    ];
    (dir, commits)
}

#[test]
fn forward_tracing_stops_at_deletion() {
    let (dir, commits) = lifecycle_repo();
    let records = extract_methods(A_V1, "A.java", "p").unwrap();
    let options = TraceOptions { until: Some("HEAD".into()), ..TraceOptions::default() };
    let tracer = Tracer::open(dir.path(), &commits[1].to_string(), options).unwrap();

    let foo = tracer.trace(&records[0]).unwrap();
    assert_eq!(foo.birth_commit, commits[0].to_string());
    assert_eq!(foo.revisions.iter().map(|r| r.commit_id.clone()).collect::<Vec<_>>(), vec![commits[1].to_string()]);
    assert_eq!(foo.end_of_observation, T0 + years(3.0));
    assert!(!foo.truncated);

    let bar = tracer.trace(&records[1]).unwrap();
    let ids: Vec<String> = bar.revisions.iter().map(|r| r.commit_id.clone()).collect();
    assert_eq!(ids, vec![commits[2].to_string(), commits[4].to_string()]);
    assert_eq!(bar.revisions.iter().map(|r| r.is_bugfix).collect::<Vec<_>>(), vec![true, false]);
    assert_eq!(bar.end_of_observation, T0 + years(4.0));
    assert_eq!(bar.birth_body.as_deref(), Some("int bar() {\n        return 0;\n    }"));
}

#[test]
fn observation_ends_at_snapshot_without_until() {
    let (dir, commits) = lifecycle_repo();
    let records = extract_methods(A_V1, "A.java", "p").unwrap();
    let tracer = Tracer::open(dir.path(), &commits[1].to_string(), TraceOptions::default()).unwrap();
    let bar = tracer.trace(&records[1]).unwrap();
    assert!(bar.revisions.is_empty());
    assert_eq!(bar.end_of_observation, T0 + years(1.0));
}

#[test]
fn snapshot_must_precede_until() {
    let (dir, commits) = lifecycle_repo();
    let options = TraceOptions { until: Some(commits[1].to_string()), ..TraceOptions::default() };
    let err = Tracer::open(dir.path(), "HEAD", options).err().expect("snapshot after until");
    assert!(matches!(err, HistoryError::SnapshotNotOnChain(_)), "{err}");
    assert!(matches!(Tracer::open(dir.path(), "nope", TraceOptions::default()).err(), Some(HistoryError::UnknownRevision(_))));
}

fn padding() -> String {
    (0..30).map(|i| format!("    int keep{i}() {{\n        return {i};\n    }}\n\n")).collect()
}

fn rename_with_rewrite() -> (tempfile::TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    let repo = Repository::init(dir.path()).unwrap();
    let before = format!("class Old {{\n{}    int target(int x) {{\n        return x;\n    }}\n}}\n", padding());
    let after = format!(
        "class Old {{\n{}    int target(int x) {{\n        StringBuilder sb = new StringBuilder();\n        for (int i = 0; i < x; i++) {{\n            sb.append(i);\n        }}\n        return sb.length();\n    }}\n}}\n",
        padding()
    );
    commit(&repo, &[("Old.java", Some(&before))], "start", T0);
    commit(&repo, &[("Old.java", None), ("New.java", Some(&after))], "move and rewrite", T0 + years(1.0));
    (dir, after)
}

#[test]
fn dissimilar_method_across_rename_truncates() {
    let (dir, after) = rename_with_rewrite();
    let records = extract_methods(&after, "New.java", "p").unwrap();
    let target = records.iter().find(|r| r.name == "target").unwrap();
    let keep = records.iter().find(|r| r.name == "keep3").unwrap();

    let tracer = Tracer::open(dir.path(), "HEAD", TraceOptions::default()).unwrap();
    let h = tracer.trace(target).unwrap();
    assert!(h.truncated);
    assert!(h.revisions.is_empty());
    assert_eq!(h.birth_timestamp, T0 + years(1.0));

    let k = tracer.trace(keep).unwrap();
    assert!(!k.truncated);
    assert_eq!(k.birth_timestamp, T0);

    let lenient = TraceOptions { rename_similarity: 0.0, ..TraceOptions::default() };
    let h = Tracer::open(dir.path(), "HEAD", lenient).unwrap().trace(target).unwrap();
    assert!(!h.truncated);
    assert_eq!(h.birth_timestamp, T0);
    assert_eq!(h.revisions.len(), 1);
}
