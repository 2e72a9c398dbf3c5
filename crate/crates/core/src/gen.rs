//! Barabási–Albert preferential-attachment graphs.

use rand::Rng;

use crate::graph::{NodeId, SocialGraph};
use crate::{Error, Result};

/// Starts from a clique on `m + 1` nodes; every later node attaches to `m`
/// distinct existing nodes chosen with probability proportional to degree.
/// The result has `C(m+1, 2) + m * (n - m - 1)` edges.
pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<SocialGraph> {
    if m == 0 || n <= m {
        return Err(Error::InvalidParameter(format!("Barabási–Albert needs n > m >= 1, got n={n}, m={m}")));
    }
    let mut g = SocialGraph::new(n)?;
    // one entry per edge endpoint: uniform draws are degree-proportional
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * (m * (m + 1) / 2 + m * (n - m - 1)));
    for u in 0..=m as u32 {
        for v in u + 1..=m as u32 {
            g.add_edge(NodeId(u), NodeId(v))?;
            endpoints.extend([u, v]);
        }
    }
    let mut targets: Vec<u32> = Vec::with_capacity(m);
    for new in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.add_edge(NodeId::new(new), NodeId(t))?;
            endpoints.extend([new as u32, t]);
        }
    }
    Ok(g)
}
