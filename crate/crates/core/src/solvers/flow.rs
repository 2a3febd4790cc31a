/// Min-cost flow with real capacities, solved by successive shortest paths
/// (Bellman-Ford on the residual graph, so arc costs may be negative as long
/// as the initial graph has no negative cycle).
#[derive(Debug, Clone)]
pub struct MinCostFlow {
    to: Vec<usize>,
    cap: Vec<f64>,
    cost: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

const EPS: f64 = 1e-12;

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        Self {
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) {
        self.adj[from].push(self.to.len());
        self.to.push(to);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[to].push(self.to.len());
        self.to.push(from);
        self.cap.push(0.0);
        self.cost.push(-cost);
    }

    /// Sends `demand` units from `s` to `t` at minimum cost. Returns `None`
    /// when the network cannot carry the demand.
    ///
    /// If rounding corrupts the shortest-path tree (a predecessor cycle), the
    /// result is `Some(-inf)`: still a valid lower bound, just a useless one.
    pub fn solve(&mut self, s: usize, t: usize, demand: f64) -> Option<f64> {
        let n = self.adj.len();
        let mut remaining = demand;
        let mut total = 0.0;
        let tol = EPS * demand.max(1.0);
        let cost_scale = self.cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let relax_tol = EPS * cost_scale * n as f64;
        let mut rounds = 0;
        while remaining > tol {
            rounds += 1;
            if rounds > 4 * self.to.len() + 4 {
                return Some(f64::NEG_INFINITY);
            }
            let mut dist = vec![f64::INFINITY; n];
            let mut prev_arc = vec![usize::MAX; n];
            dist[s] = 0.0;
            for _ in 1..n {
                let mut changed = false;
                for u in 0..n {
                    if dist[u].is_infinite() {
                        continue;
                    }
                    for &a in &self.adj[u] {
                        if self.cap[a] > tol {
                            let v = self.to[a];
                            let cand = dist[u] + self.cost[a];
                            if cand < dist[v] - relax_tol {
                                dist[v] = cand;
                                prev_arc[v] = a;
                                changed = true;
                            }
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[t].is_infinite() {
                return None;
            }
            let mut push = remaining;
            let mut v = t;
            let mut hops = 0;
            while v != s {
                hops += 1;
                if hops > n {
                    return Some(f64::NEG_INFINITY);
                }
                let a = prev_arc[v];
                push = push.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = prev_arc[v];
                self.cap[a] -= push;
                self.cap[a ^ 1] += push;
                v = self.to[a ^ 1];
            }
            remaining -= push;
            total += push * dist[t];
        }
        Some(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transportation_problem() {
        // two sources of 1 unit, two sinks of capacity 1; cheap diagonal
        let mut f = MinCostFlow::new(6);
        f.add_edge(0, 1, 1.0, 0.0);
        f.add_edge(0, 2, 1.0, 0.0);
        f.add_edge(1, 3, 2.0, 1.0);
        f.add_edge(1, 4, 2.0, 5.0);
        f.add_edge(2, 3, 2.0, 2.0);
        f.add_edge(2, 4, 2.0, 3.0);
        f.add_edge(3, 5, 1.0, 0.0);
        f.add_edge(4, 5, 1.0, 0.0);
        assert!((f.solve(0, 5, 2.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn negative_costs_and_infeasibility() {
        let mut f = MinCostFlow::new(3);
        f.add_edge(0, 1, 1.0, -2.0);
        f.add_edge(1, 2, 0.5, 1.0);
        assert!(f.clone().solve(0, 2, 1.0).is_none());
        assert!((f.solve(0, 2, 0.5).unwrap() + 0.5).abs() < 1e-12);
    }
}
