//! Network graph loading and offline k-shortest-path computation.
//!
//! A physical link is modeled as a pair of directed fibers with independent
//! spectrum. Paths are simple, ordered by total length, and ties are broken
//! by the lexicographic order of the node-name sequence so tables are
//! machine-independent.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;
use std::path::Path as FsPath;

/// An undirected physical link.
#[derive(Debug, Clone)]
pub struct PhysicalLink {
    pub a: u32,
    pub b: u32,
    pub length_km: f64,
}

/// One directed fiber of a physical link.
#[derive(Debug, Clone)]
pub struct DirectedLink {
    pub src: u32,
    pub dst: u32,
    pub length_km: f64,
}

/// A validated, connected network.
#[derive(Debug, Clone)]
pub struct Network {
    names: Vec<String>,
    coords: Vec<(f64, f64)>,
    physical: Vec<PhysicalLink>,
    directed: Vec<DirectedLink>,
    /// Outgoing (neighbor, directed link id) per node, sorted by neighbor name.
    adjacency: Vec<Vec<(u32, u32)>>,
}

impl Network {
    /// Build from node names with coordinates and undirected edges.
    pub fn new(
        nodes: Vec<(String, f64, f64)>,
        edges: Vec<(String, String, f64)>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Topology("no nodes declared".into()));
        }
        let mut names = Vec::with_capacity(nodes.len());
        let mut coords = Vec::with_capacity(nodes.len());
        for (name, x, y) in nodes {
            if names.contains(&name) {
                return Err(Error::Topology(format!("duplicate node id {name:?}")));
            }
            names.push(name);
            coords.push((x, y));
        }

        let index_of = |name: &str| -> Result<u32> {
            names
                .iter()
                .position(|n| n == name)
                .map(|i| i as u32)
                .ok_or_else(|| Error::Topology(format!("edge references undeclared node {name:?}")))
        };

        let mut physical = Vec::with_capacity(edges.len());
        let mut directed = Vec::new();
        for (a, b, length_km) in edges {
            let (ia, ib) = (index_of(&a)?, index_of(&b)?);
            if ia == ib {
                return Err(Error::Topology(format!("self-loop on node {a:?}")));
            }
            if !(length_km > 0.0) {
                return Err(Error::Topology(format!(
                    "link {a:?}-{b:?} has non-positive length {length_km}"
                )));
            }
            if physical
                .iter()
                .any(|l: &PhysicalLink| (l.a, l.b) == (ia, ib) || (l.a, l.b) == (ib, ia))
            {
                return Err(Error::Topology(format!("duplicate link {a:?}-{b:?}")));
            }
            physical.push(PhysicalLink {
                a: ia,
                b: ib,
                length_km,
            });
            directed.push(DirectedLink {
                src: ia,
                dst: ib,
                length_km,
            });
            directed.push(DirectedLink {
                src: ib,
                dst: ia,
                length_km,
            });
        }

        let mut adjacency = vec![Vec::new(); names.len()];
        for (id, l) in directed.iter().enumerate() {
            adjacency[l.src as usize].push((l.dst, id as u32));
        }
        for adj in &mut adjacency {
            adj.sort_by(|x, y| names[x.0 as usize].cmp(&names[y.0 as usize]));
        }

        let net = Self {
            names,
            coords,
            physical,
            directed,
            adjacency,
        };
        net.check_connected()?;
        Ok(net)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![0u32];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Topology(format!(
                "graph is disconnected: node {:?} unreachable",
                self.names[i]
            )));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn node_name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn node_index(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn coord(&self, id: u32) -> (f64, f64) {
        self.coords[id as usize]
    }

    pub fn physical_links(&self) -> &[PhysicalLink] {
        &self.physical
    }

    pub fn directed_links(&self) -> &[DirectedLink] {
        &self.directed
    }

    pub fn directed_link(&self, id: u32) -> &DirectedLink {
        &self.directed[id as usize]
    }

    fn neighbors(&self, v: u32) -> &[(u32, u32)] {
        &self.adjacency[v as usize]
    }
}

/// A simple directed path, as both node and directed-link sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<u32>,
    pub links: Vec<u32>,
    pub length_km: f64,
}

/// Precomputed k-shortest paths for every ordered node pair.
#[derive(Debug, Clone)]
pub struct PathTable {
    n_nodes: usize,
    k: usize,
    table: Vec<Vec<Path>>,
}

impl PathTable {
    /// Up to `k` loopless shortest paths per ordered pair, via Yen's method.
    pub fn compute(net: &Network, k: usize) -> Self {
        assert!(k >= 1, "k must be at least 1");
        let n = net.node_count();
        let mut table = Vec::with_capacity(n * n);
        for src in 0..n as u32 {
            for dst in 0..n as u32 {
                if src == dst {
                    table.push(Vec::new());
                } else {
                    table.push(yen(net, src, dst, k));
                }
            }
        }
        Self {
            n_nodes: n,
            k,
            table,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Paths for the ordered pair, shortest first; index 0 is path 1.
    pub fn paths(&self, src: u32, dst: u32) -> &[Path] {
        &self.table[src as usize * self.n_nodes + dst as usize]
    }
}

/// Total order used everywhere paths are ranked: ascending length, then the
/// node-name sequence lexicographically.
fn path_order(net: &Network, a: &Path, b: &Path) -> std::cmp::Ordering {
    a.length_km
        .total_cmp(&b.length_km)
        .then_with(|| name_seq_cmp(net, &a.nodes, &b.nodes))
}

fn name_seq_cmp(net: &Network, a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let an = a.iter().map(|&v| net.node_name(v));
    let bn = b.iter().map(|&v| net.node_name(v));
    an.cmp(bn)
}

/// Dijkstra that yields the (length, name-sequence)-minimal simple path.
///
/// Heap entries carry the whole path; since two simple paths to the same node
/// always differ strictly before their common endpoint, appending a link
/// preserves the lexicographic order and per-node settling stays exact.
fn shortest_path(
    net: &Network,
    src: u32,
    dst: u32,
    banned_nodes: &[bool],
    banned_links: &[bool],
) -> Option<Path> {
    struct Entry {
        length: f64,
        nodes: Vec<u32>,
        links: Vec<u32>,
        names: Vec<u32>, // name-rank per node, for cheap lexicographic compare
    }
    impl PartialEq for Entry {
        fn eq(&self, other: &Self) -> bool {
            self.length == other.length && self.names == other.names
        }
    }
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // Reversed: BinaryHeap is a max-heap, we pop the smallest.
            other
                .length
                .total_cmp(&self.length)
                .then_with(|| other.names.cmp(&self.names))
        }
    }

    // Rank nodes by name once so sequences compare by u32.
    let mut rank: Vec<u32> = (0..net.node_count() as u32).collect();
    rank.sort_by(|&a, &b| net.node_name(a).cmp(net.node_name(b)));
    let mut name_rank = vec![0u32; net.node_count()];
    for (r, &v) in rank.iter().enumerate() {
        name_rank[v as usize] = r as u32;
    }

    let mut settled = vec![false; net.node_count()];
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        length: 0.0,
        nodes: vec![src],
        links: Vec::new(),
        names: vec![name_rank[src as usize]],
    });

    while let Some(entry) = heap.pop() {
        let at = *entry.nodes.last().unwrap();
        if settled[at as usize] {
            continue;
        }
        settled[at as usize] = true;
        if at == dst {
            return Some(Path {
                nodes: entry.nodes,
                links: entry.links,
                length_km: entry.length,
            });
        }
        for &(next, link) in net.neighbors(at) {
            if settled[next as usize]
                || banned_nodes[next as usize]
                || banned_links[link as usize]
                || entry.nodes.contains(&next)
            {
                continue;
            }
            let mut nodes = entry.nodes.clone();
            nodes.push(next);
            let mut links = entry.links.clone();
            links.push(link);
            let mut names = entry.names.clone();
            names.push(name_rank[next as usize]);
            heap.push(Entry {
                length: entry.length + net.directed_link(link).length_km,
                nodes,
                links,
                names,
            });
        }
    }
    None
}

/// Length summed left to right along the path, so that equal node sequences
/// always produce bit-identical lengths.
fn path_length(net: &Network, links: &[u32]) -> f64 {
    links
        .iter()
        .fold(0.0, |acc, &l| acc + net.directed_link(l).length_km)
}

fn yen(net: &Network, src: u32, dst: u32, k: usize) -> Vec<Path> {
    let no_nodes = vec![false; net.node_count()];
    let no_links = vec![false; net.directed_links().len()];
    let first = match shortest_path(net, src, dst, &no_nodes, &no_links) {
        Some(p) => p,
        None => return Vec::new(),
    };
    let mut accepted = vec![first];
    let mut candidates: Vec<Path> = Vec::new();

    while accepted.len() < k {
        let prev = accepted.last().unwrap().clone();
        for spur_idx in 0..prev.nodes.len() - 1 {
            let spur_node = prev.nodes[spur_idx];
            let root_nodes = &prev.nodes[..=spur_idx];
            let root_links = &prev.links[..spur_idx];

            let mut banned_links = vec![false; net.directed_links().len()];
            for p in &accepted {
                if p.nodes.len() > spur_idx && p.nodes[..=spur_idx] == *root_nodes {
                    if let Some(&l) = p.links.get(spur_idx) {
                        banned_links[l as usize] = true;
                    }
                }
            }
            let mut banned_nodes = vec![false; net.node_count()];
            for &v in &root_nodes[..spur_idx] {
                banned_nodes[v as usize] = true;
            }

            if let Some(spur) = shortest_path(net, spur_node, dst, &banned_nodes, &banned_links) {
                let mut nodes = root_nodes.to_vec();
                nodes.extend_from_slice(&spur.nodes[1..]);
                let mut links = root_links.to_vec();
                links.extend_from_slice(&spur.links);
                let length_km = path_length(net, &links);
                let cand = Path {
                    nodes,
                    links,
                    length_km,
                };
                if !accepted.iter().chain(&candidates).any(|p| p.nodes == cand.nodes) {
                    candidates.push(cand);
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let best = candidates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| path_order(net, a, b))
            .map(|(i, _)| i)
            .unwrap();
        accepted.push(candidates.swap_remove(best));
    }
    accepted
}

/// Load a network from a node file `(id, x, y)` and an edge file
/// `(a, b, length_km)`. Rows are comma- or whitespace-delimited; a single
/// header row is skipped when its numeric fields do not parse. Lines that are
/// empty or start with `#` are ignored.
pub fn load_network(node_file: &FsPath, edge_file: &FsPath) -> Result<Network> {
    let node_text = std::fs::read_to_string(node_file)
        .map_err(|e| Error::Topology(format!("cannot read {}: {e}", node_file.display())))?;
    let edge_text = std::fs::read_to_string(edge_file)
        .map_err(|e| Error::Topology(format!("cannot read {}: {e}", edge_file.display())))?;
    parse_network(&node_text, &edge_text)
}

/// Parse node and edge tables from text. See [`load_network`].
pub fn parse_network(node_text: &str, edge_text: &str) -> Result<Network> {
    let mut nodes = Vec::new();
    for (lineno, fields) in rows(node_text) {
        if fields.len() != 3 {
            return Err(Error::Topology(format!(
                "node line {lineno}: expected 3 fields (id, x, y), got {}",
                fields.len()
            )));
        }
        match (fields[1].parse::<f64>(), fields[2].parse::<f64>()) {
            (Ok(x), Ok(y)) => nodes.push((fields[0].to_string(), x, y)),
            _ if nodes.is_empty() && lineno == first_row_line(node_text) => continue, // header
            _ => {
                return Err(Error::Topology(format!(
                    "node line {lineno}: cannot parse coordinates"
                )))
            }
        }
    }
    let mut edges = Vec::new();
    for (lineno, fields) in rows(edge_text) {
        if fields.len() != 3 {
            return Err(Error::Topology(format!(
                "edge line {lineno}: expected 3 fields (a, b, length_km), got {}",
                fields.len()
            )));
        }
        match fields[2].parse::<f64>() {
            Ok(len) => edges.push((fields[0].to_string(), fields[1].to_string(), len)),
            _ if edges.is_empty() && lineno == first_row_line(edge_text) => continue, // header
            _ => {
                return Err(Error::Topology(format!(
                    "edge line {lineno}: cannot parse length"
                )))
            }
        }
    }
    Network::new(nodes, edges)
}

fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let fields: Vec<&str> = if line.contains(',') {
            line.split(',').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        Some((i + 1, fields))
    })
}

fn first_row_line(text: &str) -> usize {
    rows(text).next().map(|(i, _)| i).unwrap_or(0)
}
