//! `.save` / `.open`: a directory with one CSV pair per graph, one CSV per
//! table and a manifest of names and settings. Graphs are rebuilt on open,
//! so the physical layout is fresh but the content is the same.

use std::fs;
use std::path::Path;

use rg_graph::{io, RgGraphStore};

use crate::{CliError, Config, Session};

const MANIFEST: &str = "session.txt";

fn safe(name: &str) -> Result<&str, CliError> {
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(CliError::User(format!("cannot save `{name}`: names must be alphanumeric")));
    }
    Ok(name)
}

pub fn save(s: &Session, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    // output settings belong to the process, not the session
    for k in Config::KEYS.into_iter().filter(|k| !matches!(*k, "format" | "timing")) {
        manifest.push_str(&format!("set {k} {}\n", s.cfg.get(k).unwrap()));
    }
    if let Some(d) = &s.db.default_graph {
        manifest.push_str(&format!("default {d}\n"));
    }
    for (name, g) in &s.db.graphs {
        let n = safe(name)?;
        let pg = g.browse(None, None)?;
        io::write_vertices(fs::File::create(dir.join(format!("{n}.vertices.csv")))?, &pg.vertices)?;
        io::write_edges(fs::File::create(dir.join(format!("{n}.edges.csv")))?, &pg.edges)?;
        manifest.push_str(&format!("graph {n}\n"));
    }
    for (name, t) in &s.db.tables {
        let n = safe(name)?;
        io::write_table(fs::File::create(dir.join(format!("{n}.table.csv")))?, t)?;
        manifest.push_str(&format!("table {n}\n"));
    }
    fs::write(dir.join(MANIFEST), manifest)?;
    Ok(())
}

pub fn open(dir: &Path, cfg: Config) -> Result<Session, CliError> {
    let text = fs::read_to_string(dir.join(MANIFEST))?;
    let mut s = Session::new(cfg);
    let mut default = None;
    for line in text.lines() {
        let mut w = line.split_whitespace();
        match (w.next(), w.next(), w.next()) {
            (Some("set"), Some(k), Some(v)) => s.cfg.set(k, v)?,
            (Some("default"), Some(d), None) => default = Some(d.to_string()),
            (Some("graph"), Some(n), None) => {
                let g = io::load_graph(&dir.join(format!("{n}.vertices.csv")), &dir.join(format!("{n}.edges.csv")))?;
                s.db.add_graph(n, RgGraphStore::convert(&g, s.cfg.store.clone())?);
            }
            (Some("table"), Some(n), None) => {
                s.db.add_table(n, io::load_table(&dir.join(format!("{n}.table.csv")))?);
            }
            _ => return Err(CliError::User(format!("bad manifest line `{line}`"))),
        }
    }
    if default.is_some() {
        s.db.default_graph = default;
    }
    Ok(s)
}
