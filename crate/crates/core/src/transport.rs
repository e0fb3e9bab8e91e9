//! Exact bipartite transportation by maximum flow (Edmonds–Karp).

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::Zero;

struct Graph {
    to: Vec<usize>,
    cap: Vec<BigUint>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn new(nodes: usize) -> Self {
        Graph { to: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    /// Adds `u → v` and its residual twin; returns the forward edge id.
    fn add_edge(&mut self, u: usize, v: usize, cap: BigUint) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(cap);
        self.adj[u].push(id);
        self.to.push(u);
        self.cap.push(BigUint::zero());
        self.adj[v].push(id + 1);
        id
    }

    fn max_flow(&mut self, s: usize, t: usize) -> BigUint {
        let mut total = BigUint::zero();
        loop {
            let mut via = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            via[s] = usize::MAX - 1;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if via[v] == usize::MAX && !self.cap[e].is_zero() {
                        via[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if via[t] == usize::MAX {
                return total;
            }
            let mut path = Vec::new();
            let mut v = t;
            while v != s {
                let e = via[v];
                path.push(e);
                v = self.to[e ^ 1];
            }
            let bottleneck = path.iter().map(|&e| &self.cap[e]).min().expect("path is non-empty").clone();
            for e in path {
                self.cap[e] -= &bottleneck;
                self.cap[e ^ 1] += &bottleneck;
            }
            total += bottleneck;
        }
    }
}

/// Finds a flow on the bipartite graph `edges` (left, right) that moves as
/// much of `supply` to `demand` as possible. Returns the total flow and the
/// flow on each edge, in input order. Results are deterministic.
pub(crate) fn transport(supply: &[BigUint], demand: &[BigUint], edges: &[(usize, usize)]) -> (BigUint, Vec<BigUint>) {
    let (l, r) = (supply.len(), demand.len());
    let (s, t) = (0, l + r + 1);
    let unbounded: BigUint = supply.iter().sum::<BigUint>() + 1u32;
    let mut g = Graph::new(l + r + 2);
    for (i, x) in supply.iter().enumerate() {
        g.add_edge(s, 1 + i, x.clone());
    }
    let ids: Vec<usize> = edges.iter().map(|&(a, b)| g.add_edge(1 + a, 1 + l + b, unbounded.clone())).collect();
    for (j, y) in demand.iter().enumerate() {
        g.add_edge(1 + l + j, t, y.clone());
    }
    let total = g.max_flow(s, t);
    let flows = ids.into_iter().map(|e| g.cap[e ^ 1].clone()).collect();
    (total, flows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(xs: &[u32]) -> Vec<BigUint> {
        xs.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn balanced_transport_saturates() {
        let edges = [(0, 0), (0, 1), (1, 1)];
        let (total, flow) = transport(&u(&[3, 2]), &u(&[1, 4]), &edges);
        assert_eq!(total, BigUint::from(5u32));
        assert_eq!(flow, u(&[1, 2, 2]));
    }

    #[test]
    fn blocked_demand_is_reported() {
        let (total, _) = transport(&u(&[5, 1]), &u(&[1, 5]), &[(0, 0), (1, 1)]);
        assert_eq!(total, BigUint::from(2u32));
    }
}
