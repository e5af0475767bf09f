//! Rooted binary trees whose leaves are the vertices of a graph.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;


use crate::error::{Error, Result};

/// A subtree. Internal nodes always have two children and cache their leaf count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Leaf(usize),
    Internal { children: Box<[Node; 2]>, size: usize },
}

impl Node {
    pub fn leaf(v: usize) -> Self {
        Node::Leaf(v)
    }

    pub fn join(left: Node, right: Node) -> Self {
        let size = left.size() + right.size();
        Node::Internal { children: Box::new([left, right]), size }
    }

    #[inline]
    pub fn size(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Internal { size, .. } => *size,
        }
    }

    pub fn children(&self) -> Option<(&Node, &Node)> {
        match self {
            Node::Leaf(_) => None,
            Node::Internal { children, .. } => Some((&children[0], &children[1])),
        }
    }

    /// Leaf labels in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size());
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Node::Leaf(v) => out.push(*v),
            Node::Internal { children, .. } => {
                children[0].collect_leaves(out);
                children[1].collect_leaves(out);
            }
        }
    }

    /// Left-leaning caterpillar: the first vertex is split off at the top,
    /// then the second, and so on.
    pub fn caterpillar(vertices: &[usize]) -> Option<Self> {
        let (&last, rest) = vertices.split_last()?;
        let mut node = Node::leaf(last);
        for &v in rest.iter().rev() {
            node = Node::join(Node::leaf(v), node);
        }
        Some(node)
    }

    /// Joins subtrees left-to-right into a left-leaning binary expansion of
    /// a k-ary merge.
    pub fn join_all(nodes: Vec<Node>) -> Option<Self> {
        let mut it = nodes.into_iter();
        let first = it.next()?;
        Some(it.fold(first, Node::join))
    }

    fn validate_sizes(&self) -> Result<()> {
        if let Node::Internal { children, size } = self {
            children[0].validate_sizes()?;
            children[1].validate_sizes()?;
            if *size != children[0].size() + children[1].size() {
                return Err(Error::InvalidDendrogram("cached leaf count is stale".into()));
            }
        }
        Ok(())
    }

    fn write_json(&self, out: &mut String) {
        match self {
            Node::Leaf(v) => write!(out, "{{\"leaf\":{v}}}").unwrap(),
            Node::Internal { children, .. } => {
                out.push_str("{\"children\":[");
                children[0].write_json(out);
                out.push(',');
                children[1].write_json(out);
                out.push_str("]}");
            }
        }
    }

    fn canonical_into(&self, out: &mut String) -> usize {
        match self {
            Node::Leaf(v) => {
                write!(out, "{v}").unwrap();
                *v
            }
            Node::Internal { children, .. } => {
                let (mut a, mut b) = (String::new(), String::new());
                let ma = children[0].canonical_into(&mut a);
                let mb = children[1].canonical_into(&mut b);
                if ma <= mb {
                    write!(out, "({a},{b})").unwrap();
                } else {
                    write!(out, "({b},{a})").unwrap();
                }
                ma.min(mb)
            }
        }
    }
}

/// A full hierarchical clustering: a binary tree whose leaves are exactly `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dendrogram {
    root: Node,
}

impl Dendrogram {
    pub fn new(root: Node) -> Result<Self> {
        root.validate_sizes()?;
        let n = root.size();
        let mut seen = vec![false; n];
        for v in root.leaves() {
            if v >= n || seen[v] {
                return Err(Error::InvalidDendrogram(format!(
                    "leaves must be a permutation of 0..{n} (offending label {v})"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    /// Number of leaves.
    pub fn n(&self) -> usize {
        self.root.size()
    }

    pub fn caterpillar(n: usize) -> Result<Self> {
        let order: Vec<usize> = (0..n).collect();
        let root = Node::caterpillar(&order)
            .ok_or_else(|| Error::InvalidDendrogram("tree needs at least one leaf".into()))?;
        Self::new(root)
    }

    /// Calls `f(node, left_leaves, right_leaves)` for every internal node.
    pub fn for_each_split<F>(&self, mut f: F)
    where
        F: FnMut(&Node, &[usize], &[usize]),
    {
        fn walk<F: FnMut(&Node, &[usize], &[usize])>(node: &Node, f: &mut F) -> Vec<usize> {
            match node {
                Node::Leaf(v) => vec![*v],
                Node::Internal { children, .. } => {
                    let mut left = walk(&children[0], f);
                    let right = walk(&children[1], f);
                    f(node, &left, &right);
                    left.extend(right);
                    left
                }
            }
        }
        walk(&self.root, &mut f);
    }

    /// `|T_ij|` for every pair.
    pub fn lca_sizes(&self) -> LcaSizes {
        let n = self.n();
        let mut sizes = vec![0usize; n * n];
        self.for_each_split(|node, left, right| {
            let s = node.size();
            for &a in left {
                for &b in right {
                    sizes[a * n + b] = s;
                    sizes[b * n + a] = s;
                }
            }
        });
        LcaSizes { n, sizes }
    }

    /// Canonical string with children ordered by their smallest leaf; equal
    /// strings mean equal trees up to child order.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        self.root.canonical_into(&mut s);
        s
    }

    /// Applies a vertex relabeling `v -> perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        fn go(node: &Node, perm: &[usize]) -> Node {
            match node {
                Node::Leaf(v) => Node::Leaf(perm[*v]),
                Node::Internal { children, .. } => {
                    Node::join(go(&children[0], perm), go(&children[1], perm))
                }
            }
        }
        Self::new(go(&self.root, perm))
    }

    /// `{"leaf": i}` or `{"children": [<node>, <node>]}`, without whitespace.
    pub fn to_json_string(&self) -> String {
        let mut out = String::with_capacity(16 * self.n());
        self.root.write_json(&mut out);
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut p = TreeParser { bytes: text.as_bytes(), pos: 0 };
        let root = p.node()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.error("trailing characters"));
        }
        Self::new(root)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::InvalidDendrogram(message) => Error::Malformed { path: path.to_path_buf(), message },
            other => other,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// Recursive-descent reader for the tree format. Hand-written because the
/// generic JSON value types recurse with frames large enough to overflow on
/// deep caterpillars.
struct TreeParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl TreeParser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::InvalidDendrogram(format!("{what} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn key(&mut self) -> Result<String> {
        self.expect(b'"')?;
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos] != b'"' {
            self.pos += 1;
        }
        let key = String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned();
        self.expect(b'"')?;
        Ok(key)
    }

    fn node(&mut self) -> Result<Node> {
        self.expect(b'{')?;
        let node = match self.key()?.as_str() {
            "leaf" => {
                self.expect(b':')?;
                self.skip_ws();
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
                Node::Leaf(digits.parse().map_err(|_| self.error("expected a vertex id"))?)
            }
            "children" => {
                self.expect(b':')?;
                self.expect(b'[')?;
                let mut kids = Vec::with_capacity(2);
                loop {
                    kids.push(self.node()?);
                    self.skip_ws();
                    match self.bytes.get(self.pos) {
                        Some(b',') => self.pos += 1,
                        Some(b']') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.error("expected `,` or `]`")),
                    }
                }
                let count = kids.len();
                let [a, b]: [Node; 2] = kids.try_into().map_err(|_| {
                    Error::InvalidDendrogram(format!("internal node with {count} children"))
                })?;
                Node::join(a, b)
            }
            other => return Err(self.error(&format!("unknown key `{other}`"))),
        };
        self.expect(b'}')?;
        Ok(node)
    }
}

/// Symmetric matrix of LCA leaf counts; the diagonal is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcaSizes {
    n: usize,
    sizes: Vec<usize>,
}

impl LcaSizes {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        if i == j {
            1
        } else {
            self.sizes[i * self.n + j]
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced4() -> Dendrogram {
        Dendrogram::new(Node::join(
            Node::join(Node::leaf(0), Node::leaf(1)),
            Node::join(Node::leaf(2), Node::leaf(3)),
        ))
        .unwrap()
    }

    #[test]
    fn caterpillar_lca() {
        let t = Dendrogram::new(Node::join(
            Node::join(Node::leaf(0), Node::leaf(1)),
            Node::leaf(2),
        ))
        .unwrap();
        let l = t.lca_sizes();
        assert_eq!((l.get(0, 1), l.get(0, 2), l.get(1, 2)), (2, 3, 3));
    }

    #[test]
    fn balanced_lca() {
        let l = balanced4().lca_sizes();
        assert_eq!(l.get(0, 1), 2);
        assert_eq!(l.get(2, 3), 2);
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert_eq!(l.get(i, j), 4);
            assert_eq!(l.get(j, i), 4);
        }
    }

    #[test]
    fn invalid_leaf_sets_rejected() {
        assert!(Dendrogram::new(Node::join(Node::leaf(0), Node::leaf(0))).is_err());
        assert!(Dendrogram::new(Node::join(Node::leaf(0), Node::leaf(2))).is_err());
        assert!(Dendrogram::from_json_str(r#"{"children": [{"leaf": 0}]}"#).is_err());
        assert!(Dendrogram::from_json_str(r#"{"children": [{"leaf": 0}, {"leaf": 1}, {"leaf": 2}]}"#).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = balanced4();
        let s = t.to_json_string();
        assert_eq!(s, r#"{"children":[{"children":[{"leaf":0},{"leaf":1}]},{"children":[{"leaf":2},{"leaf":3}]}]}"#);
        assert_eq!(Dendrogram::from_json_str(&s).unwrap(), t);
    }

    #[test]
    fn whitespace_is_tolerated() {
        let t = Dendrogram::from_json_str(" { \"children\" : [ {\"leaf\": 1} ,\n {\"leaf\":0} ] } ").unwrap();
        assert_eq!(t.canonical(), "(0,1)");
        assert!(Dendrogram::from_json_str(r#"{"leaf": 0} x"#).is_err());
        assert!(Dendrogram::from_json_str(r#"{"leaf": -1}"#).is_err());
    }

    #[test]
    fn deep_caterpillar_round_trip() {
        let t = Dendrogram::caterpillar(600).unwrap();
        assert_eq!(Dendrogram::from_json_str(&t.to_json_string()).unwrap(), t);
    }

    #[test]
    fn canonical_ignores_child_order() {
        let a = balanced4();
        let b = Dendrogram::new(Node::join(
            Node::join(Node::leaf(3), Node::leaf(2)),
            Node::join(Node::leaf(1), Node::leaf(0)),
        ))
        .unwrap();
        assert_eq!(a.canonical(), b.canonical());
        assert_ne!(a.canonical(), Dendrogram::caterpillar(4).unwrap().canonical());
    }

    #[test]
    fn single_leaf() {
        let t = Dendrogram::caterpillar(1).unwrap();
        assert_eq!(t.n(), 1);
        assert!(t.root().children().is_none());
    }
}
