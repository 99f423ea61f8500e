//! Lasso search on implicitly given edge-labelled graphs.
//!
//! Two engines: an SCC search for generalized acceptance (used when the graph
//! is a word-restricted run graph, small by construction) and an iterative
//! nested DFS for plain Büchi acceptance with resource caps (used for
//! emptiness of large products).

use std::collections::HashMap;
use std::hash::Hash;
use std::time::Instant;

/// `stem` leads from an initial node to `cycle[0].0`; each entry is a node
/// and the label of the edge leaving it. The last cycle edge returns to
/// `cycle[0].0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoPath<N, E> {
    pub stem: Vec<(N, E)>,
    pub cycle: Vec<(N, E)>,
}

struct Explored<N, E> {
    nodes: Vec<N>,
    edges: Vec<Vec<(E, usize)>>,
    initial: Vec<usize>,
}

fn explore<N, E, I, S>(initial: I, succ: S) -> Explored<N, E>
where
    N: Clone + Eq + Hash,
    I: IntoIterator<Item = N>,
    S: Fn(&N) -> Vec<(E, N)>,
{
    let mut ids: HashMap<N, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut init = Vec::new();
    for n in initial {
        let id = *ids.entry(n.clone()).or_insert_with(|| {
            nodes.push(n);
            nodes.len() - 1
        });
        if !init.contains(&id) {
            init.push(id);
        }
    }
    let mut edges: Vec<Vec<(E, usize)>> = Vec::new();
    let mut k = 0;
    while k < nodes.len() {
        let out: Vec<(E, usize)> = succ(&nodes[k])
            .into_iter()
            .map(|(e, m)| {
                let id = *ids.entry(m.clone()).or_insert_with(|| {
                    nodes.push(m);
                    nodes.len() - 1
                });
                (e, id)
            })
            .collect();
        edges.push(out);
        k += 1;
    }
    Explored {
        nodes,
        edges,
        initial: init,
    }
}

/// Tarjan's algorithm, iterative. Returns the component index of each node.
pub(crate) fn tarjan<E>(edges: &[Vec<(E, usize)>]) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let n = edges.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut n_comps = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut k)) = call.last_mut() {
            if *k < edges[v].len() {
                let w = edges[v][*k].1;
                *k += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = n_comps;
                        if w == v {
                            break;
                        }
                    }
                    n_comps += 1;
                }
            }
        }
    }
    comp
}

/// BFS inside `allowed` from `from` to the first node satisfying `goal`;
/// returns the path as (node, edge index) pairs, excluding the goal node.
fn bfs<E>(
    edges: &[Vec<(E, usize)>],
    from: usize,
    allowed: &dyn Fn(usize) -> bool,
    goal: &dyn Fn(usize) -> bool,
    nonempty: bool,
) -> Option<(Vec<(usize, usize)>, usize)> {
    let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    if !nonempty && goal(from) {
        return Some((Vec::new(), from));
    }
    queue.push_back(from);
    let mut seen = std::collections::HashSet::new();
    seen.insert(from);
    while let Some(v) = queue.pop_front() {
        for (k, (_, w)) in edges[v].iter().enumerate() {
            let w = *w;
            if !allowed(w) {
                continue;
            }
            if goal(w) {
                let mut path = vec![(v, k)];
                let mut cur = v;
                while cur != from {
                    let &(p, pk) = parent.get(&cur).expect("bfs parent");
                    path.push((p, pk));
                    cur = p;
                }
                path.reverse();
                return Some((path, w));
            }
            if seen.insert(w) {
                parent.insert(w, (v, k));
                queue.push_back(w);
            }
        }
    }
    None
}

/// Finds a lasso whose cycle visits, for every bit of `full`, a node whose
/// `marks` contain that bit. With `full == 0` any reachable cycle qualifies.
/// Deterministic: exploration follows the order of `succ`.
pub fn generalized_lasso<N, E, I, S, M>(initial: I, succ: S, marks: M, full: u64) -> Option<LassoPath<N, E>>
where
    N: Clone + Eq + Hash,
    E: Clone,
    I: IntoIterator<Item = N>,
    S: Fn(&N) -> Vec<(E, N)>,
    M: Fn(&N) -> u64,
{
    let g = explore(initial, succ);
    let comp = tarjan(&g.edges);
    let n_comps = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut size = vec![0usize; n_comps];
    let mut mask = vec![0u64; n_comps];
    let mut self_loop = vec![false; n_comps];
    for v in 0..g.nodes.len() {
        size[comp[v]] += 1;
        mask[comp[v]] |= marks(&g.nodes[v]);
        if g.edges[v].iter().any(|(_, w)| *w == v) {
            self_loop[comp[v]] = true;
        }
    }
    let good = |c: usize| (size[c] > 1 || self_loop[c]) && mask[c] & full == full;
    // first good component in discovery order of its nodes
    let target = (0..g.nodes.len()).find(|&v| good(comp[v]))?;
    let c = comp[target];

    let path_from_init = g
        .initial
        .iter()
        .find_map(|&s| bfs(&g.edges, s, &|_| true, &|v| comp[v] == c, false))?;
    let (stem_idx, entry) = path_from_init;

    let in_c = |v: usize| comp[v] == c;
    let mut cycle_idx: Vec<(usize, usize)> = Vec::new();
    let mut cur = entry;
    let mut todo = full;
    while todo != 0 {
        let bit = todo & todo.wrapping_neg();
        let (seg, end) = bfs(&g.edges, cur, &in_c, &|v| marks(&g.nodes[v]) & bit != 0, false)
            .expect("component covers its marks");
        cycle_idx.extend(seg);
        todo &= !marks(&g.nodes[end]);
        todo &= !bit;
        cur = end;
    }
    if cur != entry || cycle_idx.is_empty() {
        let (seg, _) = bfs(&g.edges, cur, &in_c, &|v| v == entry, true).expect("component is strongly connected");
        cycle_idx.extend(seg);
    }

    let label = |(v, k): (usize, usize)| (g.nodes[v].clone(), g.edges[v][k].0.clone());
    Some(LassoPath {
        stem: stem_idx.into_iter().map(label).collect(),
        cycle: cycle_idx.into_iter().map(label).collect(),
    })
}

/// Limits for [`nested_dfs`].
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_states: usize,
    pub deadline: Option<Instant>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_states: 5_000_000,
            deadline: None,
        }
    }
}

/// Why a search stopped without an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exhausted {
    States(usize),
    Time,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Color {
    White,
    Cyan,
    Blue,
    Red,
}

struct Frame<E> {
    node: usize,
    succ: Vec<(E, usize)>,
    next: usize,
}

struct Arena<N> {
    ids: HashMap<N, usize>,
    nodes: Vec<N>,
    color: Vec<Color>,
}

impl<N: Clone + Eq + Hash> Arena<N> {
    fn intern(&mut self, n: N) -> usize {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        self.nodes.push(n.clone());
        self.color.push(Color::White);
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }
}

/// Nested depth-first search for a reachable accepting cycle (Courcoubetis,
/// Vardi, Wolper, Yannakakis, with cyan marking for early cycle detection).
pub fn nested_dfs<N, E, I, S, A>(initial: I, succ: S, accepting: A, budget: Budget) -> Result<Option<LassoPath<N, E>>, Exhausted>
where
    N: Clone + Eq + Hash,
    E: Clone,
    I: IntoIterator<Item = N>,
    S: Fn(&N) -> Vec<(E, N)>,
    A: Fn(&N) -> bool,
{
    let mut arena = Arena {
        ids: HashMap::new(),
        nodes: Vec::new(),
        color: Vec::new(),
    };
    let mut steps = 0usize;
    let mut expand = |arena: &mut Arena<N>, v: usize| -> Result<Vec<(E, usize)>, Exhausted> {
        steps += 1;
        if arena.nodes.len() > budget.max_states {
            return Err(Exhausted::States(budget.max_states));
        }
        if steps.is_multiple_of(1024) {
            if let Some(d) = budget.deadline {
                if Instant::now() > d {
                    return Err(Exhausted::Time);
                }
            }
        }
        let node = arena.nodes[v].clone();
        Ok(succ(&node).into_iter().map(|(e, m)| (e, arena.intern(m))).collect())
    };

    let roots: Vec<N> = initial.into_iter().collect();
    for root in roots {
        let r = arena.intern(root);
        if arena.color[r] != Color::White {
            continue;
        }
        arena.color[r] = Color::Cyan;
        let first = expand(&mut arena, r)?;
        let mut blue: Vec<Frame<E>> = vec![Frame {
            node: r,
            succ: first,
            next: 0,
        }];
        while let Some(top) = blue.last_mut() {
            if top.next < top.succ.len() {
                let (_, w) = top.succ[top.next];
                top.next += 1;
                let v = top.node;
                match arena.color[w] {
                    Color::Cyan if accepting(&arena.nodes[v]) || accepting(&arena.nodes[w]) => {
                        // early detection: v -> w closes a cycle on the blue stack
                        return Ok(Some(blue_cycle(&arena, &blue, w, Vec::new())));
                    }
                    Color::White => {
                        arena.color[w] = Color::Cyan;
                        let s = expand(&mut arena, w)?;
                        blue.push(Frame { node: w, succ: s, next: 0 });
                    }
                    _ => {}
                }
            } else {
                let v = top.node;
                if accepting(&arena.nodes[v]) {
                    if let Some(red_path) = red_search(&mut arena, &mut expand, v)? {
                        let target = red_path.last().map(|f: &(usize, E, usize)| f.2).expect("nonempty red path");
                        return Ok(Some(blue_cycle(&arena, &blue, target, red_path)));
                    }
                    arena.color[v] = Color::Red;
                } else {
                    arena.color[v] = Color::Blue;
                }
                blue.pop();
            }
        }
    }
    Ok(None)
}

/// Red search from accepting `seed` for a cyan node. Returns the red path as
/// `(from, label, to)` edges, ending at the cyan node.
fn red_search<N, E, X>(arena: &mut Arena<N>, expand: &mut X, seed: usize) -> Result<Option<Vec<(usize, E, usize)>>, Exhausted>
where
    N: Clone + Eq + Hash,
    E: Clone,
    X: FnMut(&mut Arena<N>, usize) -> Result<Vec<(E, usize)>, Exhausted>,
{
    let first = expand(arena, seed)?;
    let mut stack: Vec<Frame<E>> = vec![Frame {
        node: seed,
        succ: first,
        next: 0,
    }];
    while let Some(top) = stack.last_mut() {
        if top.next < top.succ.len() {
            let (_, w) = top.succ[top.next];
            top.next += 1;
            match arena.color[w] {
                Color::Cyan => {
                    let path = stack
                        .iter()
                        .map(|f| {
                            let (e, to) = f.succ[f.next - 1].clone();
                            (f.node, e, to)
                        })
                        .collect();
                    return Ok(Some(path));
                }
                Color::Red => {}
                _ => {
                    arena.color[w] = Color::Red;
                    let s = expand(arena, w)?;
                    stack.push(Frame { node: w, succ: s, next: 0 });
                }
            }
        } else {
            stack.pop();
        }
    }
    Ok(None)
}

/// Assembles the lasso: blue stack up to `target` is the stem; the rest of the
/// blue stack followed by the red path (or the closing blue edge) is the cycle.
fn blue_cycle<N: Clone, E: Clone>(arena: &Arena<N>, blue: &[Frame<E>], target: usize, red: Vec<(usize, E, usize)>) -> LassoPath<N, E> {
    let pos = blue.iter().position(|f| f.node == target).expect("cyan node is on the blue stack");
    let edge = |f: &Frame<E>| (arena.nodes[f.node].clone(), f.succ[f.next - 1].0.clone());
    let stem = blue[..pos].iter().map(edge).collect();
    let mut cycle: Vec<(N, E)> = blue[pos..].iter().map(edge).collect();
    if !red.is_empty() {
        // the top blue frame's last edge was not taken; the red path starts at the top node
        cycle.pop();
        cycle.extend(red.into_iter().map(|(v, e, _)| (arena.nodes[v].clone(), e)));
    }
    LassoPath { stem, cycle }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adjacency as `(label, target)` lists.
    fn graph<'a>(adj: &'a [&[(char, u32)]]) -> impl Fn(&u32) -> Vec<(char, u32)> + 'a {
        move |v| adj[*v as usize].to_vec()
    }

    fn check<E: Clone + PartialEq + std::fmt::Debug>(
        path: &LassoPath<u32, E>,
        succ: &dyn Fn(&u32) -> Vec<(E, u32)>,
        initial: u32,
    ) {
        let seq: Vec<&(u32, E)> = path.stem.iter().chain(path.cycle.iter()).collect();
        assert_eq!(seq[0].0, initial);
        for (k, (v, e)) in seq.iter().map(|x| (x.0, x.1.clone())).enumerate() {
            let next = if k + 1 < seq.len() { seq[k + 1].0 } else { path.cycle[0].0 };
            assert!(succ(&v).contains(&(e, next)), "edge {v} -> {next} missing");
        }
    }

    #[test]
    fn scc_search_covers_all_marks() {
        // 0 -> 1 -> 2 -> 1, 2 -> 3 -> 3; marks: 1 has bit0, 2 has bit1, 3 has bit0
        let adj: &[&[(char, u32)]] = &[&[('a', 1)], &[('b', 2)], &[('c', 1), ('d', 3)], &[('e', 3)]];
        let succ = graph(adj);
        let marks = |v: &u32| match v {
            1 => 1,
            2 => 2,
            3 => 1,
            _ => 0,
        };
        let p = generalized_lasso([0u32], &succ, marks, 3).unwrap();
        check(&p, &succ, 0);
        let on_cycle: Vec<u32> = p.cycle.iter().map(|x| x.0).collect();
        assert!(on_cycle.contains(&1) && on_cycle.contains(&2));
        assert!(generalized_lasso([0u32], &succ, |v: &u32| if *v == 0 { 1 } else { 0 }, 1).is_none());
        // no obligations: any cycle
        assert!(generalized_lasso([0u32], &succ, |_: &u32| 0, 0).is_some());
        let acyclic: &[&[(char, u32)]] = &[&[('a', 1)], &[]];
        assert!(generalized_lasso([0u32], graph(acyclic), |_: &u32| 0, 0).is_none());
    }

    #[test]
    fn ndfs_finds_cycles_through_accepting_nodes() {
        let adj: &[&[(char, u32)]] = &[&[('a', 1), ('x', 4)], &[('b', 2)], &[('c', 1), ('d', 3)], &[('e', 3)], &[('f', 4)]];
        let succ = graph(adj);
        for acc in 0..5u32 {
            let found = nested_dfs([0u32], &succ, |v: &u32| *v == acc, Budget::default()).unwrap();
            let scc = generalized_lasso([0u32], &succ, |v: &u32| u64::from(*v == acc), 1);
            assert_eq!(found.is_some(), scc.is_some(), "accepting node {acc}");
            if let Some(p) = found {
                check(&p, &succ, 0);
                assert!(p.cycle.iter().any(|x| x.0 == acc));
            }
        }
    }

    #[test]
    fn ndfs_respects_state_budget() {
        let succ = |v: &u64| vec![((), v + 1)];
        let r = nested_dfs([0u64], succ, |_: &u64| false, Budget { max_states: 100, deadline: None });
        assert_eq!(r, Err(Exhausted::States(100)));
    }

    #[test]
    fn red_search_after_blue_completion() {
        // accepting 1 is only on a cycle reached via 2 after the blue DFS finished 1's subtree
        // 0 -> 1, 1 -> 2, 2 -> 3, 3 -> 1
        let adj: &[&[(char, u32)]] = &[&[('a', 1)], &[('b', 2)], &[('c', 3)], &[('d', 1)]];
        let succ = graph(adj);
        let p = nested_dfs([0u32], &succ, |v: &u32| *v == 2, Budget::default()).unwrap().unwrap();
        check(&p, &succ, 0);
        assert!(p.cycle.iter().any(|x| x.0 == 2));
    }
}
