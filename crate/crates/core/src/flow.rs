//! Successive-shortest-path min-cost flow with real-valued costs.
//!
//! Only used on small bipartite networks (trip-to-school assignment and trip
//! chaining), so shortest paths are found with a queue-based Bellman-Ford
//! each round instead of maintaining potentials.

use std::collections::VecDeque;

const EPS: f64 = 1e-7;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

#[derive(Debug, Clone)]
pub struct MinCostFlow {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); nodes],
            edges: Vec::new(),
        }
    }

    /// Adds `from -> to` and its residual twin. Returns an id for [`Self::flow`].
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
        self.adjacency[from].push(id);
        self.adjacency[to].push(id + 1);
        id
    }

    /// Flow currently routed on edge `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.edges[id + 1].cap
    }

    fn shortest_path(&self, source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
        let n = self.adjacency.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![None; n];
        let mut queued = vec![false; n];
        let mut queue = VecDeque::new();
        dist[source] = 0.0;
        queue.push_back(source);
        queued[source] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &e in &self.adjacency[u] {
                let edge = &self.edges[e];
                if edge.cap <= 0 {
                    continue;
                }
                let cand = dist[u] + edge.cost;
                if cand < dist[edge.to] - EPS {
                    dist[edge.to] = cand;
                    via[edge.to] = Some(e);
                    if !queued[edge.to] {
                        queued[edge.to] = true;
                        queue.push_back(edge.to);
                    }
                }
            }
        }
        (dist, via)
    }

    /// Pushes flow from `source` to `sink` along successively cheapest paths
    /// while each path has strictly negative cost. The result is a minimum-cost
    /// flow of unconstrained value. Returns `(flow, cost)`.
    pub fn min_cost_any_flow(&mut self, source: usize, sink: usize) -> (i64, f64) {
        let mut total_flow = 0;
        let mut total_cost = 0.0;
        loop {
            let (dist, via) = self.shortest_path(source);
            // Unreachable sinks sit at +inf and also stop here.
            if dist[sink] >= -EPS {
                break;
            }
            let mut push = i64::MAX;
            let mut v = sink;
            while v != source {
                let e = via[v].expect("path edge");
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = via[v].expect("path edge");
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            total_flow += push;
            total_cost += push as f64 * dist[sink];
        }
        (total_flow, total_cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_negative_paths_only() {
        // source 0, left 1..=2, right 3..=4, sink 5
        let mut f = MinCostFlow::new(6);
        f.add_edge(0, 1, 1, 0.0);
        f.add_edge(0, 2, 1, 0.0);
        let a = f.add_edge(1, 3, 1, -5.0);
        let b = f.add_edge(1, 4, 1, -4.0);
        let c = f.add_edge(2, 3, 1, -4.5);
        let d = f.add_edge(2, 4, 1, 1.0);
        f.add_edge(3, 5, 1, 0.0);
        f.add_edge(4, 5, 1, 0.0);
        let (flow, cost) = f.min_cost_any_flow(0, 5);
        // 1->4 and 2->3 (-8.5) beats 1->3 alone (-5) and 1->3 + 2->4 (-4).
        assert_eq!(flow, 2);
        assert!((cost + 8.5).abs() < 1e-9);
        assert_eq!((f.flow(a), f.flow(b), f.flow(c), f.flow(d)), (0, 1, 1, 0));
    }

    #[test]
    fn no_flow_when_nothing_improves() {
        let mut f = MinCostFlow::new(3);
        f.add_edge(0, 1, 1, 2.0);
        f.add_edge(1, 2, 1, 0.0);
        assert_eq!(f.min_cost_any_flow(0, 2), (0, 0.0));
    }
}
