//! Complete-linkage agglomerative clustering, dendrogram cuts and Newick I/O.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Labelled symmetric distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(format!("distance matrix must be {n}x{n}")));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidParameter(format!("invalid distance {a} at ({i}, {j})")));
                }
                if (a - b).abs() > 1e-12 {
                    return Err(Error::AsymmetricDistance(i, j));
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.len().max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Square TSV: header row of labels after an empty corner cell, then one
    /// labelled row per entry.
    pub fn write_tsv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_labeled_matrix(&self.labels, &self.rows(), out)
    }

    pub fn read_tsv<R: BufRead>(reader: R, source: impl AsRef<Path>) -> Result<Self> {
        let source = source.as_ref();
        let mut lines = reader
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.starts_with('#') && !l.trim().is_empty()));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(source, 1, "empty distance matrix"))?;
        let header = header.map_err(|e| Error::io(source, e))?;
        let labels: Vec<String> = header.split('\t').skip(1).map(str::to_owned).collect();
        let mut rows = Vec::with_capacity(labels.len());
        for (i, (lineno, line)) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let mut cells = line.split('\t');
            let label = cells.next().unwrap_or_default();
            if labels.get(i).map(String::as_str) != Some(label) {
                return Err(Error::parse(source, lineno + 1, format!("row label '{label}' does not match header")));
            }
            let row = cells
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::parse(source, lineno + 1, e.to_string()))?;
            rows.push(row);
        }
        DistanceMatrix::new(labels, rows)
    }
}

/// Square matrix as TSV with a labelled header row and first column.
pub fn write_labeled_matrix<W: Write>(labels: &[String], rows: &[Vec<f64>], mut out: W) -> std::io::Result<()> {
    for l in labels {
        write!(out, "\t{l}")?;
    }
    writeln!(out)?;
    for (label, row) in labels.iter().zip(rows) {
        write!(out, "{label}")?;
        for v in row {
            write!(out, "\t{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// A merge of two clusters. Leaves are `0..n`; the cluster created by merge
/// `k` has id `n + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
    pub leaf_labels: Vec<String>,
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.leaf_labels.len()
    }

    fn height_of(&self, id: usize) -> f64 {
        let n = self.leaf_count();
        if id < n {
            0.0
        } else {
            self.merges[id - n].height
        }
    }
}

/// Repeatedly merges the two clusters whose largest pairwise distance is
/// smallest. Ties go to the lexicographically smallest pair of cluster ids.
/// Within a merge the child holding the smaller leaf index goes left.
pub fn complete_linkage(dist: &DistanceMatrix) -> Result<Dendrogram> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::InvalidParameter("complete linkage needs at least two items".into()));
    }
    // active[k] = cluster id held in slot k; d[a][b] over slots
    let mut ids: Vec<usize> = (0..n).collect();
    let mut min_leaf: Vec<usize> = (0..n).collect();
    let mut d: Vec<Vec<f64>> = dist.rows();
    let mut active: Vec<bool> = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in a + 1..n {
                if !active[b] {
                    continue;
                }
                let (lo, hi) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                let cand = (d[a][b], lo, hi, a, b);
                let better = match best {
                    None => true,
                    Some((h, l, u, _, _)) => cand.0 < h || (cand.0 == h && (lo, hi) < (l, u)),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let (height, _, _, a, b) = best.expect("two active clusters remain");
        let (left, right) = if min_leaf[a] <= min_leaf[b] { (a, b) } else { (b, a) };
        merges.push(Merge {
            left: ids[left],
            right: ids[right],
            height,
        });
        for c in 0..n {
            if active[c] && c != a && c != b {
                let v = d[a][c].max(d[b][c]);
                d[a][c] = v;
                d[c][a] = v;
            }
        }
        active[b] = false;
        ids[a] = n + step;
        min_leaf[a] = min_leaf[a].min(min_leaf[b]);
    }
    Ok(Dendrogram {
        merges,
        leaf_labels: dist.labels().to_vec(),
    })
}

/// Cluster id per leaf after undoing the `k - 1` highest merges. Ids are
/// dense and follow the first leaf of each cluster.
pub fn cut_dendrogram(dend: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = dend.leaf_count();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("cut size {k} outside 1..={n}")));
    }
    // applying merges in order keeps the n - k lowest ones for a monotone tree
    let mut parent: Vec<usize> = (0..n + dend.merges.len()).collect();
    for (step, m) in dend.merges.iter().take(n - k).enumerate() {
        parent[m.left] = n + step;
        parent[m.right] = n + step;
    }
    let root = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };
    let roots: Vec<usize> = (0..n).map(root).collect();
    Ok(crate::partition::Partition::from_labels(&roots).assignment().to_vec())
}

/// Newick text with branch lengths equal to height differences.
pub fn to_newick(dend: &Dendrogram) -> String {
    let n = dend.leaf_count();
    let mut out = String::new();
    if n == 1 && dend.merges.is_empty() {
        let _ = write!(out, "{};", dend.leaf_labels[0]);
        return out;
    }
    fn emit(dend: &Dendrogram, id: usize, out: &mut String) {
        let n = dend.leaf_count();
        if id < n {
            out.push_str(&dend.leaf_labels[id]);
            return;
        }
        let m = dend.merges[id - n];
        out.push('(');
        for (i, child) in [m.left, m.right].into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            emit(dend, child, out);
            let _ = write!(out, ":{}", m.height - dend.height_of(child));
        }
        out.push(')');
    }
    emit(dend, n + dend.merges.len() - 1, &mut out);
    out.push(';');
    out
}

/// Parses Newick produced by [`to_newick`] (binary, labelled leaves, branch
/// lengths on every non-root node) back into a dendrogram. Leaves are
/// numbered in order of appearance; merges are ordered by height with the
/// same tie rule as [`complete_linkage`].
pub fn parse_newick(text: &str) -> Result<Dendrogram> {
    struct Parser<'a> {
        s: &'a [u8],
        pos: usize,
        labels: Vec<String>,
        // (left, right, height) in post-order
        nodes: Vec<(Node, Node, f64)>,
    }
    #[derive(Clone, Copy)]
    enum Node {
        Leaf(usize),
        Internal(usize),
    }
    fn bad(msg: &str) -> Error {
        Error::InvalidParameter(format!("malformed Newick: {msg}"))
    }
    impl Parser<'_> {
        fn peek(&self) -> Option<u8> {
            self.s.get(self.pos).copied()
        }
        fn expect(&mut self, c: u8) -> Result<()> {
            if self.peek() == Some(c) {
                self.pos += 1;
                Ok(())
            } else {
                Err(bad(&format!("expected '{}' at byte {}", c as char, self.pos)))
            }
        }
        fn token(&mut self) -> &str {
            let start = self.pos;
            while let Some(c) = self.peek() {
                if matches!(c, b'(' | b')' | b',' | b':' | b';') {
                    break;
                }
                self.pos += 1;
            }
            std::str::from_utf8(&self.s[start..self.pos]).unwrap_or_default()
        }
        fn length(&mut self) -> Result<f64> {
            self.expect(b':')?;
            self.token().trim().parse::<f64>().map_err(|_| bad("invalid branch length"))
        }
        // returns (node, height)
        fn subtree(&mut self) -> Result<(Node, f64)> {
            if self.peek() == Some(b'(') {
                self.pos += 1;
                let (left, hl) = self.subtree()?;
                let bl = self.length()?;
                self.expect(b',')?;
                let (right, hr) = self.subtree()?;
                let br = self.length()?;
                self.expect(b')')?;
                let height = (hl + bl).max(hr + br);
                self.nodes.push((left, right, height));
                Ok((Node::Internal(self.nodes.len() - 1), height))
            } else {
                let label = self.token().trim().to_owned();
                if label.is_empty() {
                    return Err(bad("empty leaf label"));
                }
                self.labels.push(label);
                Ok((Node::Leaf(self.labels.len() - 1), 0.0))
            }
        }
    }
    let mut p = Parser {
        s: text.trim().as_bytes(),
        pos: 0,
        labels: Vec::new(),
        nodes: Vec::new(),
    };
    p.subtree()?;
    p.expect(b';')?;
    let n = p.labels.len();
    // Replay the merges in linkage order: lowest height first, ties to the
    // smallest pair of cluster ids among nodes whose children exist.
    let mut final_id: Vec<Option<usize>> = vec![None; p.nodes.len()];
    let id_of = |node: Node, final_id: &[Option<usize>]| match node {
        Node::Leaf(i) => Some(i),
        Node::Internal(i) => final_id[i],
    };
    let mut merges = Vec::with_capacity(p.nodes.len());
    for step in 0..p.nodes.len() {
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for (idx, &(l, r, h)) in p.nodes.iter().enumerate() {
            if final_id[idx].is_some() {
                continue;
            }
            let (Some(a), Some(b)) = (id_of(l, &final_id), id_of(r, &final_id)) else {
                continue;
            };
            let key = (h, a.min(b), a.max(b), idx);
            let better = best.is_none_or(|(bh, lo, hi, _)| h < bh || (h == bh && (key.1, key.2) < (lo, hi)));
            if better {
                best = Some(key);
            }
        }
        let (_, _, _, idx) = best.expect("a tree always has a mergeable node");
        let (l, r, h) = p.nodes[idx];
        merges.push(Merge {
            left: id_of(l, &final_id).expect("child formed"),
            right: id_of(r, &final_id).expect("child formed"),
            height: h,
        });
        final_id[idx] = Some(n + step);
    }
    Ok(Dendrogram {
        merges,
        leaf_labels: p.labels,
    })
}
