// Shell commands end to end, through the library and through the `rg` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use rg_cli::{split_statements, CliError, Config, Session};

const VERTICES: &str = "vid,label,attr
0,User,10
1,User,11
2,User,12
3,User,13
4,Link,20
5,Link,21
";

// Two share/share/follow triangles: (0,4,1) and (2,5,3).
const EDGES: &str = "eid,src,dst,label
0,0,4,Share
1,1,4,Share
2,1,0,Follow
3,2,5,Share
4,3,5,Share
5,3,2,Follow
6,0,5,Share
";

const PROFILES: &str = "uid,profile
0,alpha
1,beta
2,gamma
";

const RUNNING: &str = "select v0.id as vid_0, v2.id as vid_2, D.profile as user_profile
    from (
        select v0.id as vid_0, v2.id as vid_2, v1.attr as link_attr
        match (v0: User)-[e0: Share]->(v1: Link)
              (v2: User)-[e1: Share]->(v1: Link)
              (v2: User)-[e2: Follow]->(v0: User)
    ) as P join D on P.vid_0 = D.uid";

const STATS: &str = "
card(D_V^0) = 1000
card(D_V^2) = 1000
card(D_V^1) = 1000
card(D) = 1000
deg(D_V^0.out_L) = 100
deg(D_V^0.in_L) = 100
deg(D_V^1.in_L) = 100
deg(D_V^2.out_L) = 100
card(D_V^0, D_o^0) = 1e4
card(D_V^0, D_o^0, D_V^1, D) = 2000
card(D, D_V^0, D_V^1, D_o^0, D_i^1, D_i^2) = 1e4
card(D_V^0, D) = 1e4
card(D_V^0, D, D_o^0) = 2e5
card(D_V^2, D_o^1) = 1e3
card(D_V^2, D_o^1, D_V^1) = 1e4
card(D_V^2, D_o^1, D_V^1, D_o^2, D_i^0) = 2000
card(D_V^2, D_o^1, D_V^1, D_o^2, D_i^0, D_V^0) = 1e4
card(D_V^2, D_o^1, D_V^1, D_o^2, D_i^0, D_V^0, D) = 1e4
";

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        for (name, text) in [("v.csv", VERTICES), ("e.csv", EDGES), ("d.csv", PROFILES), ("stats.txt", STATS)] {
            fs::write(dir.path().join(name), text).unwrap();
        }
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    /// Statements that load the social graph as `g` and the profile table as `D`.
    fn load(&self) -> String {
        format!(".load_graph g {} {}\n.load_table D {}\n", self.p("v.csv"), self.p("e.csv"), self.p("d.csv"))
    }
}

fn quiet() -> Config {
    Config { timing: false, ..Config::default() }
}

fn session(f: &Fixture) -> Session {
    let mut s = Session::new(quiet());
    s.run_script(&f.load(), &mut Vec::new()).unwrap();
    s
}

fn sorted_lines(s: &str) -> Vec<&str> {
    let mut v: Vec<&str> = s.lines().collect();
    v.sort();
    v
}

#[test]
fn load_stats_and_query() {
    let f = Fixture::new();
    let mut s = Session::new(quiet());
    let out = s.run(&format!(".load_graph g {} {}", f.p("v.csv"), f.p("e.csv"))).unwrap();
    assert_eq!(out, "graph g: 6 vertices, 7 edges\n");
    let out = s.run(&format!(".load_table D {}", f.p("d.csv"))).unwrap();
    assert_eq!(out, "table D: 3 rows, columns uid,profile\n");
    assert!(s.run(".stats g").unwrap().starts_with("vertices 6\nedges 7\n"));
    assert_eq!(s.run(".stats D").unwrap(), "rows 3\ncolumns uid,profile\n");
    let out = s.run(RUNNING).unwrap();
    assert_eq!(sorted_lines(&out), vec!["-- 2 rows", "0,1,alpha", "2,3,gamma", "vid_0,vid_2,user_profile"]);
}

#[test]
fn optimizer_toggle_keeps_the_answer() {
    let f = Fixture::new();
    let mut s = session(&f);
    let on = s.run(RUNNING).unwrap();
    s.run(".set optimizer off").unwrap();
    assert_eq!(sorted_lines(&s.run(RUNNING).unwrap()), sorted_lines(&on));
    s.run(".set chunk_size 1").unwrap();
    assert_eq!(sorted_lines(&s.run(RUNNING).unwrap()), sorted_lines(&on));
}

#[test]
fn explain_under_injected_statistics() {
    let f = Fixture::new();
    let mut s = session(&f);
    assert_eq!(s.run(&format!(".overrides {}", f.p("stats.txt"))).unwrap(), "18 statistics overrides loaded\n");
    let out = s.run(&format!(".explain {RUNNING}")).unwrap();
    assert!(out.starts_with("cost=116400.0\n"), "{out}");
    assert!(out.contains("θ^I"), "{out}");
    s.run(".overrides none").unwrap();
    let out = s.run(&format!(".explain {RUNNING}")).unwrap();
    assert!(!out.starts_with("cost=116400.0\n"), "{out}");
}

#[test]
fn settings_echo_and_reject() {
    let mut s = Session::new(quiet());
    assert_eq!(s.run(".set tau 0.2").unwrap(), "tau = 0.2\n");
    assert_eq!(s.cfg.params.tau, 0.2);
    assert_eq!(s.run(".set format tsv").unwrap(), "format = tsv\n");
    let all = s.run(".set").unwrap();
    assert_eq!(all.lines().count(), Config::KEYS.len());
    for bad in [".set tau x", ".set nope 1", ".set chunk_size 0", ".set format xml"] {
        assert!(matches!(s.run(bad), Err(CliError::User(_))), "{bad}");
    }
}

#[test]
fn user_errors() {
    let f = Fixture::new();
    let mut s = session(&f);
    for bad in [
        ".bench nope",
        ".bench triangle edges=ten",
        ".frobnicate",
        ".stats missing",
        ".browse missing 0",
        ".load_table X /nonexistent/file.csv",
        "select * from Nowhere",
        "select from",
        ".explain",
    ] {
        let e = s.run(bad).unwrap_err();
        assert_eq!(e.exit_code(), 1, "{bad}: {e}");
    }
}

#[test]
fn browse_and_update() {
    let f = Fixture::new();
    let mut s = session(&f);
    let out = s.run(".browse g 4").unwrap();
    let (vs, es) = out.split_once("\n\n").unwrap();
    assert_eq!(vs.lines().count(), 1 + 3, "{out}");
    assert_eq!(es.lines().count(), 1 + 2, "{out}");
    let all = s.run(".browse g all").unwrap();
    let (vs, es) = all.split_once("\n\n").unwrap();
    assert_eq!((vs.lines().count(), es.lines().count()), (7, 8));

    fs::write(f.path("delta.txt"), "# new follower\n+E 7 0 1 Follow\n+V 6 User attr=14\n-E 6\n").unwrap();
    let out = s.run(&format!(".update g {}", f.p("delta.txt"))).unwrap();
    assert!(out.starts_with("graph g: 7 vertices, 7 edges;"), "{out}");
    let q = "select a.id, b.id from g match (a: User)-[f: Follow]->(b: User)";
    assert_eq!(s.run(q).unwrap().lines().last(), Some("-- 3 rows"));
}

#[test]
fn save_and_open_round_trip() {
    let f = Fixture::new();
    let mut s = session(&f);
    s.run(".set tau 0.3").unwrap();
    let before = s.run(RUNNING).unwrap();
    let dir = f.path("saved");
    s.run(&format!(".save {}", dir.display())).unwrap();
    let mut t = Session::new(quiet());
    assert_eq!(t.run(&format!(".open {}", dir.display())).unwrap(), format!("opened 1 graphs, 1 tables from {}\n", dir.display()));
    assert_eq!(t.cfg.params.tau, 0.3);
    assert_eq!(sorted_lines(&t.run(RUNNING).unwrap()), sorted_lines(&before));
    assert_eq!(t.run(".browse g all").unwrap(), s.run(".browse g all").unwrap());
}

#[test]
fn statements_split_on_semicolons() {
    let text = ".set tau 0.2\n-- comment\nselect a\n  from b;\n.explain select 1\nfrom t;\n\nselect 2";
    assert_eq!(split_statements(text), vec![".set tau 0.2", "select a\n  from b", ".explain select 1\nfrom t", "select 2"]);
}

#[test]
fn ablation_table_shape() {
    let t = rg_cli::bench::ablation(1, Default::default(), 2048, false).unwrap();
    assert_eq!(t.columns, vec!["feature", "full_ms", "ablated_ms", "same_result"]);
    assert_eq!(t.len(), 3);
    assert!(t.rows.iter().all(|r| r[3].to_string() == "true"), "{:?}", t.rows);
}

fn rg(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rg"));
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    for k in ["RG_SCRIPT", "RG_NO_TIMING", "RG_FORMAT", "RG_TAU", "RG_CHUNK_SIZE", "RG_BLOCK_SIZE", "RG_SEGMENT_THRESHOLD"] {
        cmd.env_remove(k);
    }
    let mut child = cmd.spawn().unwrap();
    {
        use std::io::Write;
        let mut input = child.stdin.take().unwrap();
        input.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    }
    child.wait_with_output().unwrap()
}

fn write_script(f: &Fixture, name: &str, body: &str) -> String {
    fs::write(f.path(name), format!("{}{body}", f.load())).unwrap();
    f.p(name)
}

#[test]
fn batch_runs_are_deterministic() {
    let f = Fixture::new();
    let script = write_script(&f, "run.rg", &format!("{RUNNING};\n.browse g 0 all\n"));
    let a = rg(&["--script", &script, "--no-timing"], None);
    let b = rg(&["--script", &script, "--no-timing"], None);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("-- 2 rows\n"), "{text}");
}

#[test]
fn stdin_and_environment() {
    let f = Fixture::new();
    let input = format!("{}select D.uid from D;\n.quit\nselect 1;\n", f.load());
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rg"));
    let out = {
        cmd.env("RG_NO_TIMING", "1").env("RG_FORMAT", "tsv").stdin(Stdio::piped()).stdout(Stdio::piped());
        let mut child = cmd.spawn().unwrap();
        use std::io::Write;
        child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
        child.wait_with_output().unwrap()
    };
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("uid\n0\n1\n2\n-- 3 rows\n"), "{text}");
    assert!(!text.contains("-- 1 rows"), "statements after .quit ran: {text}");
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    let bad = write_script(&f, "bad.rg", "select * from Missing;\nselect D.uid from D;\n");
    let out = rg(&["--script", &bad, "--no-timing"], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error:"), "{err}");
    assert!(!String::from_utf8(out.stdout).unwrap().contains("-- 3 rows"), "batch mode kept going after an error");

    let missing = rg(&["--script", &f.p("none.rg")], None);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(rg(&["--chunk-size", "0"], Some("")).status.code(), Some(1));
    assert_eq!(rg(&["--bogus-flag"], None).status.code(), Some(1));
    assert_eq!(rg(&["--help"], None).status.code(), Some(0));
}

#[test]
fn flags_reach_the_store() {
    let f = Fixture::new();
    let script = write_script(&f, "set.rg", ".set\n");
    let out = rg(&["--script", &script, "--block-size", "4096", "--segment-threshold", "512", "--tau", "0.25", "--format", "csv"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for want in ["block_size = 4096", "segment_threshold = 512", "tau = 0.25", "format = csv"] {
        assert!(text.contains(want), "{want}: {text}");
    }
}
