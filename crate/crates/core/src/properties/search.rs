use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;

use crate::kernel::{Action, Lts};

/// Product states (LTS state, observer state) numbered in discovery order,
/// with the breadth-first parent of each.
pub(super) struct Product<M> {
    nodes: Vec<(usize, M)>,
    index: HashMap<(usize, M), usize>,
    parent: Vec<Option<(usize, usize)>>,
}

impl<M: Clone + Eq + Hash> Product<M> {
    pub fn new(initial: usize, monitor: M) -> Self {
        let root = (initial, monitor);
        Product {
            nodes: vec![root.clone()],
            index: HashMap::from([(root, 0)]),
            parent: vec![None],
        }
    }

    pub fn node(&self, id: usize) -> &(usize, M) {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn index(&self, key: &(usize, M)) -> usize {
        self.index[key]
    }

    /// Adds `key` reached from `from` by label `label`; returns its id if new.
    pub fn insert(&mut self, key: (usize, M), from: usize, label: usize) -> Option<usize> {
        if self.index.contains_key(&key) {
            return None;
        }
        let id = self.nodes.len();
        self.nodes.push(key.clone());
        self.index.insert(key, id);
        self.parent.push(Some((from, label)));
        Some(id)
    }

    pub fn trace(&self, lts: &Lts, mut node: usize) -> Vec<Action> {
        let mut trace = vec![];
        while let Some((p, l)) = self.parent[node] {
            trace.push(lts.label(l).clone());
            node = p;
        }
        trace.reverse();
        trace
    }
}

/// Strongly connected components containing a cycle (more than one node,
/// or a self-loop). `edges[v]` lists `(label, target)`.
pub(super) fn tarjan_nontrivial(edges: &[Vec<(usize, usize)>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = edges.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = vec![];
    let mut result = vec![];
    let mut counter = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = frames.last_mut() {
            if let Some(&(_, w)) = edges[v].get(*next) {
                *next += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(u, _)) = frames.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = vec![];
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                let cyclic = component.len() > 1 || edges[v].iter().any(|&(_, w)| w == v);
                if cyclic {
                    result.push(component);
                }
            }
        }
    }
    result
}

/// Labels of a shortest cycle from `entry` back to itself inside `component`.
pub(super) fn cycle_through(edges: &[Vec<(usize, usize)>], entry: usize, component: &[usize]) -> Vec<usize> {
    let inside: HashSet<usize> = component.iter().copied().collect();
    let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut queue = VecDeque::from([entry]);
    while let Some(v) = queue.pop_front() {
        for &(l, w) in &edges[v] {
            if !inside.contains(&w) {
                continue;
            }
            if w == entry {
                let mut labels = vec![l];
                let mut at = v;
                while at != entry {
                    let (p, pl) = parent[&at];
                    labels.push(pl);
                    at = p;
                }
                labels.reverse();
                return labels;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert((v, l));
                queue.push_back(w);
            }
        }
    }
    unreachable!("every node of a cyclic component lies on a cycle")
}
