//! Hall's condition via maximum bipartite matching.
//!
//! Left vertices are the members of a set family, right vertices the
//! coordinates they contain. A family satisfies Hall's condition iff the
//! maximum matching saturates the left side; when it does not, the left
//! vertices reachable from an unmatched vertex by alternating paths form a
//! subfamily whose union is strictly smaller than the subfamily.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HallError {
    #[error("set {position} of the family is empty")]
    EmptySupport { position: usize },
}

/// Result of a Hall check. Positions are 0-based indices into the family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum HallVerdict {
    /// `assignment[j]` is the distinct coordinate chosen for set `j`.
    Matching { assignment: Vec<usize> },
    /// A subfamily `F` with `|∪_{j∈F} S_j| < |F|`, plus that union.
    Violation { family: Vec<usize>, union: Vec<usize> },
}

impl HallVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, HallVerdict::Matching { .. })
    }
}

/// Maximum matching on a left-indexed adjacency list with `right` vertices.
#[derive(Debug, Clone)]
pub struct MaxMatching {
    pub size: usize,
    pub left_match: Vec<Option<usize>>,
    pub right_match: Vec<Option<usize>>,
}

/// Hopcroft–Karp, `O(E √V)`.
pub fn hopcroft_karp(right: usize, adj: &[Vec<usize>]) -> MaxMatching {
    let left = adj.len();
    let mut left_match = vec![None; left];
    let mut right_match: Vec<Option<usize>> = vec![None; right];
    let mut dist = vec![u32::MAX; left];
    let mut size = 0;

    loop {
        // BFS layering from free left vertices.
        let mut queue = VecDeque::new();
        for u in 0..left {
            if left_match[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found_free = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match right_match[v] {
                    None => found_free = true,
                    Some(w) if dist[w] == u32::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found_free {
            break;
        }

        let mut progressed = false;
        let mut cursor = vec![0usize; left];
        for u in 0..left {
            if left_match[u].is_none()
                && augment(u, adj, &mut dist, &mut cursor, &mut left_match, &mut right_match)
            {
                size += 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }

    MaxMatching {
        size,
        left_match,
        right_match,
    }
}

// Iterative DFS along the BFS layers so deep families do not exhaust the stack.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    dist: &mut [u32],
    cursor: &mut [usize],
    left_match: &mut [Option<usize>],
    right_match: &mut [Option<usize>],
) -> bool {
    let mut path: Vec<(usize, usize)> = Vec::new();
    let mut u = root;
    loop {
        if cursor[u] >= adj[u].len() {
            dist[u] = u32::MAX;
            match path.pop() {
                Some((prev, _)) => {
                    cursor[prev] += 1;
                    u = prev;
                    continue;
                }
                None => return false,
            }
        }
        let v = adj[u][cursor[u]];
        match right_match[v] {
            None => {
                path.push((u, v));
                for &(a, b) in &path {
                    left_match[a] = Some(b);
                    right_match[b] = Some(a);
                }
                return true;
            }
            Some(w) if dist[w] == dist[u].saturating_add(1) => {
                path.push((u, v));
                u = w;
            }
            _ => cursor[u] += 1,
        }
    }
}

/// Checks Hall's condition for a family of coordinate sets.
pub fn hall_check<S: AsRef<[usize]>>(family: &[S]) -> Result<HallVerdict, HallError> {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut coords: Vec<usize> = Vec::new();
    let mut adj = Vec::with_capacity(family.len());
    for (position, set) in family.iter().enumerate() {
        let set = set.as_ref();
        if set.is_empty() {
            return Err(HallError::EmptySupport { position });
        }
        let mut row: Vec<usize> = set
            .iter()
            .map(|&c| {
                *ids.entry(c).or_insert_with(|| {
                    coords.push(c);
                    coords.len() - 1
                })
            })
            .collect();
        row.sort_unstable();
        row.dedup();
        adj.push(row);
    }

    let matching = hopcroft_karp(coords.len(), &adj);
    if matching.size == family.len() {
        let assignment = matching
            .left_match
            .iter()
            .map(|m| coords[m.expect("saturating matching")])
            .collect();
        return Ok(HallVerdict::Matching { assignment });
    }

    let free = matching
        .left_match
        .iter()
        .position(Option::is_none)
        .expect("unsaturated matching has a free left vertex");
    let mut seen_left = vec![false; family.len()];
    let mut seen_right = vec![false; coords.len()];
    let mut queue = VecDeque::from([free]);
    seen_left[free] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if seen_right[v] {
                continue;
            }
            seen_right[v] = true;
            // Every reachable right vertex is matched, otherwise the matching
            // would not be maximum.
            let w = matching.right_match[v].expect("maximum matching leaves no augmenting path");
            if !seen_left[w] {
                seen_left[w] = true;
                queue.push_back(w);
            }
        }
    }
    let subfamily: Vec<usize> = (0..family.len()).filter(|&j| seen_left[j]).collect();
    let mut union: Vec<usize> = (0..coords.len())
        .filter(|&v| seen_right[v])
        .map(|v| coords[v])
        .collect();
    union.sort_unstable();
    debug_assert!(union.len() < subfamily.len());
    Ok(HallVerdict::Violation {
        family: subfamily,
        union,
    })
}
