//! Unit-capacity augmenting-path flows on directed multigraphs.

use std::collections::VecDeque;

/// Residual network where every arc has capacity one.
#[derive(Debug, Clone)]
pub(crate) struct UnitNetwork {
    tail: Vec<usize>,
    head: Vec<usize>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    flow: Vec<bool>,
}

impl UnitNetwork {
    pub fn new(node_count: usize) -> Self {
        Self {
            tail: Vec::new(),
            head: Vec::new(),
            out: vec![Vec::new(); node_count],
            inn: vec![Vec::new(); node_count],
            flow: Vec::new(),
        }
    }

    pub fn with_arcs(node_count: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut net = Self::new(node_count);
        for (t, h) in arcs {
            net.add_arc(t, h);
        }
        net
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn add_arc(&mut self, tail: usize, head: usize) -> usize {
        let id = self.tail.len();
        self.tail.push(tail);
        self.head.push(head);
        self.flow.push(false);
        self.out[tail].push(id);
        self.inn[head].push(id);
        id
    }

    /// Finds one augmenting path by BFS and pushes a unit along it.
    pub fn augment(&mut self, s: usize, t: usize) -> bool {
        let n = self.node_count();
        // (arc, forward?) used to reach each node
        let mut via: Vec<Option<(usize, bool)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(x) = queue.pop_front() {
            for &a in &self.out[x] {
                let y = self.head[a];
                if !self.flow[a] && !seen[y] {
                    seen[y] = true;
                    via[y] = Some((a, true));
                    if y == t {
                        break 'bfs;
                    }
                    queue.push_back(y);
                }
            }
            for &a in &self.inn[x] {
                let y = self.tail[a];
                if self.flow[a] && !seen[y] {
                    seen[y] = true;
                    via[y] = Some((a, false));
                    queue.push_back(y);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut x = t;
        while x != s {
            let (a, forward) = via[x].expect("bfs tree is connected");
            self.flow[a] = forward;
            x = if forward { self.tail[a] } else { self.head[a] };
        }
        true
    }

    /// Augments until `cap` units flow or no augmenting path is left.
    pub fn max_flow(&mut self, s: usize, t: usize, cap: usize) -> usize {
        let mut value = 0;
        while value < cap && self.augment(s, t) {
            value += 1;
        }
        value
    }

    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &a in &self.out[x] {
                let y = self.head[a];
                if !self.flow[a] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
            for &a in &self.inn[x] {
                let y = self.tail[a];
                if self.flow[a] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Decomposes the current flow into s-t paths of arc ids.
    ///
    /// The network must be acyclic, so the flow has no cycles to trip over.
    pub fn flow_paths(&self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let mut used = vec![false; self.flow.len()];
        let mut paths = Vec::new();
        loop {
            let mut path = Vec::new();
            let mut x = s;
            while x != t {
                let next = self.out[x]
                    .iter()
                    .copied()
                    .find(|&a| self.flow[a] && !used[a]);
                match next {
                    Some(a) => {
                        used[a] = true;
                        path.push(a);
                        x = self.head[a];
                    }
                    None => break,
                }
            }
            if x != t || path.is_empty() {
                debug_assert!(path.is_empty(), "flow violates conservation");
                return paths;
            }
            paths.push(path);
        }
    }
}
