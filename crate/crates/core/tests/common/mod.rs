#![allow(dead_code)]

use std::path::{Path, PathBuf};

use git2::{Oid, Repository, Signature, Time};
use rand::{Rng, SeedableRng};

use maintlens::extractor::{extract_methods, MethodRecord};
use maintlens::history::{MethodHistory, Revision, SECONDS_PER_YEAR};

pub const T0: i64 = 1_500_000_000;

pub fn years(y: f64) -> i64 {
    (y * SECONDS_PER_YEAR).round() as i64
}

/// Writes, deletes and commits on the current branch with a fixed author time.
pub fn commit(repo: &Repository, changes: &[(&str, Option<&str>)], message: &str, time: i64) -> Oid {
    let root = repo.workdir().expect("non-bare").to_path_buf();
    let mut index = repo.index().unwrap();
    for (path, content) in changes {
        let full = root.join(path);
        match content {
            Some(text) => {
                std::fs::create_dir_all(full.parent().unwrap()).unwrap();
                std::fs::write(&full, text).unwrap();
                index.add_path(Path::new(path)).unwrap();
            }
            None => {
                std::fs::remove_file(&full).unwrap();
                index.remove_path(Path::new(path)).unwrap();
            }
        }
    }
    index.write().unwrap();
    let tree = repo.find_tree(index.write_tree().unwrap()).unwrap();
    let sig = Signature::new("Dev", "dev@example.com", &Time::new(time, 0)).unwrap();
    let parents: Vec<git2::Commit<'_>> = match repo.head() {
        Ok(head) => vec![head.peel_to_commit().unwrap()],
        Err(_) => vec![],
    };
    let parent_refs: Vec<&git2::Commit<'_>> = parents.iter().collect();
    repo.commit(Some("HEAD"), &sig, &sig, message, &tree, &parent_refs).unwrap()
}

pub const CALC_V0: &str = "package demo;

public class Calc {
    public int add(int a, int b) {
        return a + b;
    }

    public int scale(int x) {
        int factor = 3;
        return x * factor;
    }
}
";

pub const CALC_V1: &str = "package demo;

public class Calc {
    public int add(int a, int b) {
        return (long) a + b > Integer.MAX_VALUE ? Integer.MAX_VALUE : a + b;
    }

    public int scale(int x) {
        int factor = 3;
        return x * factor;
    }
}
";

pub const CALC_V2: &str = "package demo;

public class Calc {
    public int add(int a, int b) {
        return (long) a + b > Integer.MAX_VALUE ? Integer.MAX_VALUE : a + b;
    }

    public int scale(int x) {
        int factor = 3;
        log(x);
        log(factor);
        return x * factor;
    }
}
";

pub const CALC_V5: &str = "package demo;

public class Calc {
    public int add(int a, int b) {
        return (long) a + b > Integer.MAX_VALUE ? Integer.MAX_VALUE : a + b;
    }

    public int scale(int x) {
        int factor = 3;
        log(x);
        log(factor);
        log(0);
        return x * factor;
    }

    public int fresh() {
        return 1;
    }
}
";

pub const CALC_V6: &str = "package demo;

public class Calc {
    public int add(int a, int b) {
        return (long) a + b > Integer.MAX_VALUE ? Integer.MAX_VALUE : a + b;
    }

    public int scale(int x) {
        int factor = 3;
        log(x);
        log(factor);
        log(0);
        return x * factor;
    }

    public int fresh() {
        return 1 + 1;
    }
}
";

pub const UTIL_V0: &str = "package demo;

public class Util {
    public static String trim(String s) {
        return s.trim();
    }
}
";

pub const STRING_UTIL_V3: &str = "package demo;

public class StringUtil {
    public static String trim(String s) {
        return s.trim();
    }
}
";

pub const STRING_UTIL_V4: &str = "package demo;

public class StringUtil {
    public static String trim(String s) {
        return s == null ? \"\" : s.trim();
    }
}
";

pub struct FixtureRepo {
    pub dir: tempfile::TempDir,
    pub commits: Vec<Oid>,
}

impl FixtureRepo {
    pub fn path(&self) -> PathBuf {
        self.dir.path().to_path_buf()
    }
}

/// Seven commits over three years:
///
/// | # | time   | message                      | change                                 |
/// |---|--------|------------------------------|----------------------------------------|
/// | 0 | 0      | Initial import               | Calc.add, Calc.scale, Util.trim        |
/// | 1 | 0.5 y  | Fix overflow bug in add      | add: one line rewritten, 55 chars in   |
/// | 2 | 1.0 y  | Add logging to scale         | scale: two lines in, 37 chars          |
/// | 3 | 1.5 y  | Move Util to StringUtil      | file rename, trim untouched            |
/// | 4 | 1.8 y  | Fixed incorrect trimming     | trim: one line rewritten, 17 chars in  |
/// | 5 | 2.5 y  | Add fresh helper             | fresh born, scale gets a third line    |
/// | 6 | 3.0 y  | Tweak fresh                  | fresh edited                           |
pub fn build_fixture_repo() -> FixtureRepo {
    let dir = tempfile::tempdir().unwrap();
    let repo = Repository::init(dir.path()).unwrap();
    let calc = "src/demo/Calc.java";
    let util = "src/demo/Util.java";
    let string_util = "src/demo/StringUtil.java";
    let commits = vec![
        commit(&repo, &[(calc, Some(CALC_V0)), (util, Some(UTIL_V0))], "Initial import", T0),
        commit(&repo, &[(calc, Some(CALC_V1))], "Fix overflow bug in add", T0 + years(0.5)),
        commit(&repo, &[(calc, Some(CALC_V2))], "Add logging to scale", T0 + years(1.0)),
        commit(&repo, &[(util, None), (string_util, Some(STRING_UTIL_V3))], "Move Util to StringUtil", T0 + years(1.5)),
        commit(&repo, &[(string_util, Some(STRING_UTIL_V4))], "Fixed incorrect trimming", T0 + years(1.8)),
        commit(&repo, &[(calc, Some(CALC_V5))], "Add fresh helper", T0 + years(2.5)),
        commit(&repo, &[(calc, Some(CALC_V6))], "Tweak fresh", T0 + years(3.0)),
    ];
    FixtureRepo { dir, commits }
}

/// Records of the fixture at its last commit, keyed by method name.
pub fn fixture_records() -> Vec<MethodRecord> {
    let mut records = extract_methods(CALC_V6, "src/demo/Calc.java", "demo").unwrap();
    records.extend(extract_methods(STRING_UTIL_V4, "src/demo/StringUtil.java", "demo").unwrap());
    records
}

pub fn by_name<'a>(records: &'a [MethodRecord], name: &str) -> &'a MethodRecord {
    records.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("no method {name}"))
}

/// Java method whose standard SLOC is exactly `sloc` (at least 2).
pub fn method_of_size(name: &str, sloc: usize, calls: &[&str]) -> String {
    assert!(sloc >= 2 + calls.len());
    let mut body = format!("    void {name}() {{\n");
    for c in calls {
        body.push_str(&format!("        {c}();\n"));
    }
    for i in 0..sloc - 2 - calls.len() {
        body.push_str(&format!("        int v{i} = {i};\n"));
    }
    body.push_str("    }\n");
    body
}

pub const SYNTHETIC_PROJECTS: [&str; 3] = ["alpha", "beta", "gamma"];
pub const SYNTHETIC_SEED: u64 = 20_240_611;

/// A corpus where each method's revision count grows with its size plus
/// noise. Histories carry no method text, so each method is one version.
pub fn synthetic_corpus() -> (Vec<MethodRecord>, Vec<MethodHistory>) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(SYNTHETIC_SEED);
    let mut records = Vec::new();
    let mut histories = Vec::new();
    for project in SYNTHETIC_PROJECTS {
        let mut source = String::from("class Synthetic {\n");
        let n_methods = rng.gen_range(40..70);
        let sizes: Vec<usize> = (0..n_methods).map(|_| rng.gen_range(3..90)).collect();
        for (i, &sloc) in sizes.iter().enumerate() {
            source.push_str(&method_of_size(&format!("m{i}"), sloc, &[]));
        }
        source.push_str("}\n");
        let file = format!("{project}/Synthetic.java");
        let recs = extract_methods(&source, &file, project).unwrap();
        for (r, &sloc) in recs.iter().zip(&sizes) {
            assert_eq!(r.sloc_standard, sloc);
            let birth = T0 + rng.gen_range(0..years(1.0));
            let n_revs = sloc / 10 + rng.gen_range(0..4);
            let mut ts = birth;
            let revisions = (0..n_revs)
                .map(|k| {
                    ts += rng.gen_range(3_600..years(1.5) / (n_revs as i64 + 1));
                    let added = rng.gen_range(0..6);
                    let deleted = rng.gen_range(0..4);
                    Revision {
                        commit_id: format!("{project}-{}-{k}", r.name),
                        timestamp: ts,
                        lines_added: added,
                        lines_deleted: deleted,
                        diff_size: added + deleted,
                        edit_distance: rng.gen_range(1..200),
                        is_bugfix: rng.gen_bool(0.2),
                        body_after: None,
                    }
                })
                .collect();
            histories.push(MethodHistory {
                method_id: r.method_id.clone(),
                birth_commit: format!("{project}-birth"),
                birth_timestamp: birth,
                end_of_observation: T0 + years(4.0),
                revisions,
                truncated: false,
                birth_body: None,
            });
        }
        records.extend(recs);
    }
    (records, histories)
}

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn synthetic_fixture_dir() -> PathBuf {
    manifest_dir().join("fixtures").join("synthetic")
}
