use std::cmp::Reverse;
use std::collections::HashSet;

use super::timing::{is_logic, is_source};
use super::{GateId, LogicNetwork, NetlistError};

/// Lazy depth-first enumeration of every source → output path, in
/// lexicographic order of gate ids.
pub struct PathEnumerator<'a> {
    fanouts: Vec<Vec<GateId>>,
    drives: Vec<bool>,
    sources: std::vec::IntoIter<GateId>,
    /// (path so far, index of next fanout to try); `None` means the
    /// path's own endpoint has not been reported yet.
    stack: Vec<(Vec<GateId>, Option<usize>)>,
    net: &'a LogicNetwork,
}

impl<'a> PathEnumerator<'a> {
    pub fn new(net: &'a LogicNetwork) -> Self {
        let mut fanouts = net.fanouts();
        fanouts.iter_mut().for_each(|f| f.sort_unstable());
        let sources: Vec<GateId> = (0..net.gates.len())
            .filter(|&g| is_source(net, g))
            .collect();
        Self {
            fanouts,
            drives: net.output_drivers(),
            sources: sources.into_iter(),
            stack: Vec::new(),
            net,
        }
    }
}

impl Iterator for PathEnumerator<'_> {
    type Item = Vec<GateId>;

    fn next(&mut self) -> Option<Vec<GateId>> {
        loop {
            let Some((path, cursor)) = self.stack.pop() else {
                let s = self.sources.next()?;
                self.stack.push((vec![s], None));
                continue;
            };
            let g = *path.last().expect("paths are non-empty");
            match cursor {
                None => {
                    self.stack.push((path.clone(), Some(0)));
                    if self.drives[g] {
                        return Some(path);
                    }
                }
                Some(k) => {
                    let succ = &self.fanouts[g];
                    if k < succ.len() {
                        let h = succ[k];
                        self.stack.push((path.clone(), Some(k + 1)));
                        if is_logic(self.net, h) {
                            let mut p = path;
                            p.push(h);
                            self.stack.push((p, None));
                        }
                    }
                }
            }
        }
    }
}

/// All primary paths, ordered by node count (descending), then by overlap
/// with the first critical path (descending), then lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Vec<GateId>>,
    /// The first `n_critical` paths have the maximum node count.
    pub n_critical: usize,
}

impl PathSet {
    pub fn rho1(&self) -> &[GateId] {
        &self.paths[0]
    }

    /// Gates lying on some maximum-node-count path.
    pub fn critical_gates(&self) -> HashSet<GateId> {
        self.paths[..self.n_critical]
            .iter()
            .flatten()
            .copied()
            .collect()
    }
}

/// Enumerate and order every primary path. Fails once more than `cap`
/// paths exist.
pub fn primary_paths(net: &LogicNetwork, cap: usize) -> Result<PathSet, NetlistError> {
    if path_count(net)? > cap as f64 {
        return Err(NetlistError::PathCap { cap });
    }
    let mut paths = Vec::new();
    for p in PathEnumerator::new(net) {
        if paths.len() >= cap {
            return Err(NetlistError::PathCap { cap });
        }
        paths.push(p);
    }
    if paths.is_empty() {
        return Ok(PathSet {
            paths,
            n_critical: 0,
        });
    }
    let longest = paths.iter().map(Vec::len).max().unwrap_or(0);
    let rho1 = paths
        .iter()
        .filter(|p| p.len() == longest)
        .min()
        .cloned()
        .expect("non-empty");
    let on_rho1: HashSet<GateId> = rho1.iter().copied().collect();
    let overlap = |p: &Vec<GateId>| p.iter().filter(|g| on_rho1.contains(g)).count();
    paths.sort_by_cached_key(|p| (Reverse(p.len()), Reverse(overlap(p)), p.clone()));
    let n_critical = paths.iter().take_while(|p| p.len() == longest).count();
    Ok(PathSet { paths, n_critical })
}

/// Number of primary paths, counted without enumerating them (saturates to
/// infinity on huge networks).
pub fn path_count(net: &LogicNetwork) -> Result<f64, NetlistError> {
    let mut count = vec![0.0f64; net.gates.len()];
    for g in net.topo_order()? {
        if !is_logic(net, g) {
            continue;
        }
        let mut fanins: Vec<GateId> = net.gates[g]
            .gate_fanins()
            .filter(|&f| is_logic(net, f))
            .collect();
        fanins.sort_unstable();
        fanins.dedup();
        count[g] =
            f64::from(u8::from(is_source(net, g))) + fanins.iter().map(|&f| count[f]).sum::<f64>();
    }
    let drives = net.output_drivers();
    Ok((0..net.gates.len())
        .filter(|&g| drives[g])
        .map(|g| count[g])
        .sum())
}

/// Split `path` into maximal runs that lie entirely inside or entirely
/// outside `critical`. Consecutive runs alternate, so the split is the
/// minimal one. Runs are returned output end first.
pub fn partition_path(path: &[GateId], critical: &HashSet<GateId>) -> Vec<Vec<GateId>> {
    let mut runs: Vec<Vec<GateId>> = Vec::new();
    let mut last: Option<bool> = None;
    for &g in path {
        let inside = critical.contains(&g);
        if last == Some(inside) {
            runs.last_mut().expect("run exists").push(g);
        } else {
            runs.push(vec![g]);
            last = Some(inside);
        }
    }
    runs.reverse();
    runs
}
