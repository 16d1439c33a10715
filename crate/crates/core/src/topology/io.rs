//! Plain-text graph files.
//!
//! Edge list: a header line `n <count>` followed by one `src dst` pair per
//! line. Roles live in a companion file with lines `node role support`,
//! where role is `h` or `a` and support is `0` or `1`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{Digraph, NodeId, NodeProfile, Role};
use crate::error::{Error, Result};

/// Companion roles path: `<edges path>.roles`.
pub fn roles_path(edges: &Path) -> PathBuf {
    let mut os = edges.as_os_str().to_owned();
    os.push(".roles");
    PathBuf::from(os)
}

pub fn write_edge_list<W: Write>(g: &Digraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "n {}", g.node_count())?;
    for (s, t) in g.edges() {
        writeln!(w, "{s} {t}")?;
    }
    w.flush()
}

pub fn write_roles<W: Write>(g: &Digraph, mut w: W) -> std::io::Result<()> {
    for v in g.nodes() {
        let p = g.profile(v);
        let role = if p.is_spy() { 'a' } else { 'h' };
        writeln!(w, "{v} {role} {}", u8::from(p.supports_protocol))?;
    }
    w.flush()
}

/// Writes the edge list to `path` and the roles file next to it.
pub fn serialize_graph(g: &Digraph, path: &Path) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_edge_list(g, BufWriter::new(f)).map_err(|e| Error::io(path, e))?;
    let rp = roles_path(path);
    let f = fs::File::create(&rp).map_err(|e| Error::io(&rp, e))?;
    write_roles(g, BufWriter::new(f)).map_err(|e| Error::io(&rp, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

fn parse_index(tok: &str, path: &Path, line: usize, n: usize) -> Result<usize> {
    let v: usize = tok.parse().map_err(|_| parse_err(path, line, format!("expected a node index, found `{tok}`")))?;
    if v >= n {
        return Err(parse_err(path, line, format!("node {v} out of range [0, {n})")));
    }
    Ok(v)
}

/// Parses edge-list text. `path` only labels errors.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<Vec<Vec<NodeId>>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| parse_err(path, 1, "missing `n <count>` header"))?;
    let mut toks = header.split_whitespace();
    let n = match (toks.next(), toks.next(), toks.next()) {
        (Some("n"), Some(c), None) => c
            .parse::<usize>()
            .map_err(|_| parse_err(path, hline + 1, format!("bad node count `{c}`")))?,
        _ => return Err(parse_err(path, hline + 1, "expected header `n <count>`")),
    };
    let mut out = vec![Vec::new(); n];
    for (i, line) in lines {
        let lineno = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(path, lineno, format!("expected `src dst`, found `{line}`")));
        }
        let s = parse_index(toks[0], path, lineno, n)?;
        let t = parse_index(toks[1], path, lineno, n)?;
        out[s].push(NodeId::from(t));
    }
    Ok(out)
}

pub fn parse_roles(text: &str, n: usize, path: &Path) -> Result<Vec<NodeProfile>> {
    let mut profiles = vec![NodeProfile::default(); n];
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(path, lineno, format!("expected `node role support`, found `{line}`")));
        }
        let v = parse_index(toks[0], path, lineno, n)?;
        let role = match toks[1] {
            "h" => Role::Honest,
            "a" => Role::Spy,
            r => return Err(parse_err(path, lineno, format!("role must be `h` or `a`, found `{r}`"))),
        };
        let supports_protocol = match toks[2] {
            "0" => false,
            "1" => true,
            s => return Err(parse_err(path, lineno, format!("support must be 0 or 1, found `{s}`"))),
        };
        profiles[v] = NodeProfile { role, supports_protocol };
    }
    Ok(profiles)
}

/// Loads a graph written by [`serialize_graph`]. A missing roles file means
/// every node is honest and supports the protocol.
pub fn load_graph(path: &Path) -> Result<Digraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let out = parse_edge_list(&text, path)?;
    let n = out.len();
    let rp = roles_path(path);
    let profiles = if rp.exists() {
        let text = fs::read_to_string(&rp).map_err(|e| Error::io(&rp, e))?;
        parse_roles(&text, n, &rp)?
    } else {
        vec![NodeProfile::default(); n]
    };
    Digraph::new(out, profiles).map_err(|e| e.context(format!("loading {}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from_seed;
    use crate::topology::{assign_roles, gen_anonymity_approx4};
    use proptest::prelude::*;

    #[test]
    fn single_node_graph_has_only_header() {
        let g = Digraph::empty(1);
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n 1\n");
    }

    #[test]
    fn malformed_line_names_line_number() {
        let err = parse_edge_list("n 4\n0 1\n3 x\n", Path::new("g.txt")).unwrap_err();
        match err {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains('x'));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_edge_list("", Path::new("g")).is_err());
        assert!(parse_edge_list("n 2\n0 5\n", Path::new("g")).is_err());
        assert!(parse_roles("0 z 1\n", 1, Path::new("r")).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.edges");
        let mut rng = rng_from_seed(5);
        let prof = assign_roles(30, 0.2, 0.5, &mut rng).unwrap();
        let g = gen_anonymity_approx4(&prof, &mut rng).unwrap();
        serialize_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);
    }

    proptest! {
        #[test]
        fn text_round_trip(seed in any::<u64>(), n in 3usize..40, p in 0.0f64..0.5) {
            let mut rng = rng_from_seed(seed);
            let prof = assign_roles(n, p, 0.7, &mut rng).unwrap();
            let g = gen_anonymity_approx4(&prof, &mut rng).unwrap();
            let mut edges = Vec::new();
            let mut roles = Vec::new();
            write_edge_list(&g, &mut edges).unwrap();
            write_roles(&g, &mut roles).unwrap();
            let out = parse_edge_list(std::str::from_utf8(&edges).unwrap(), Path::new("e")).unwrap();
            let prof = parse_roles(std::str::from_utf8(&roles).unwrap(), n, Path::new("r")).unwrap();
            prop_assert_eq!(Digraph::new(out, prof).unwrap(), g);
        }
    }
}
