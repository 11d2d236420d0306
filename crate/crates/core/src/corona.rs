//! Stopping-time partition of a cube family into trees.

use serde::{Deserialize, Serialize};

use crate::cubes::CubeTree;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoronaTree {
    pub root: usize,
    pub cubes: Vec<usize>,
    pub stop: Vec<usize>,
    /// `Q(T)'`: the root itself when it is `Q₀`, else its non-member parent
    /// or a non-member sibling.
    pub root_prime: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corona {
    pub q0: usize,
    pub trees: Vec<CoronaTree>,
    /// `Σ_i μ(Q(T_i)) / μ(Q₀)`.
    pub root_packing: f64,
    /// `Σ_i μ(Q(T_i)') / μ(Q₀)`.
    pub root_prime_packing: f64,
    /// Largest number of trees sharing one `Q(T)'`.
    pub max_prime_multiplicity: usize,
}

/// Partitions the member cubes of `Δ(Q₀)`: roots are maximal members not yet
/// in a tree; a tree takes all children of a cube when every child is a
/// member, otherwise the cube is a stopping cube.
pub fn corona_partition(tree: &CubeTree, q0: usize, member: impl Fn(usize) -> bool) -> Corona {
    let desc = tree.descendants(q0);
    let mut is_member = vec![false; tree.cubes.len()];
    for &q in &desc {
        is_member[q] = member(q);
    }
    let mut assigned = vec![false; tree.cubes.len()];
    let mut order = desc.clone();
    order.sort_by(|&a, &b| tree.cubes[b].level.cmp(&tree.cubes[a].level).then(a.cmp(&b)));
    let mut trees = Vec::new();
    for &root in &order {
        if !is_member[root] || assigned[root] {
            continue;
        }
        let mut cubes = Vec::new();
        let mut stop = Vec::new();
        let mut stack = vec![root];
        while let Some(q) = stack.pop() {
            assigned[q] = true;
            cubes.push(q);
            let ch = &tree.cubes[q].children;
            if !ch.is_empty() && ch.iter().all(|&c| is_member[c]) {
                stack.extend(ch.iter().rev());
            } else {
                stop.push(q);
            }
        }
        cubes.sort_unstable();
        stop.sort_unstable();
        let root_prime = if root == q0 {
            root
        } else {
            let parent = tree.cubes[root].parent.expect("non-root cube has a parent");
            if !is_member[parent] {
                parent
            } else {
                *tree.cubes[parent]
                    .children
                    .iter()
                    .find(|&&c| !is_member[c])
                    .expect("stopped parent has a non-member child")
            }
        };
        trees.push(CoronaTree { root, cubes, stop, root_prime });
    }
    let m0 = tree.cubes[q0].mass;
    let norm = |v: f64| if m0 > 0.0 { v / m0 } else { 0.0 };
    let mut mult = std::collections::BTreeMap::new();
    for t in &trees {
        *mult.entry(t.root_prime).or_insert(0usize) += 1;
    }
    Corona {
        q0,
        root_packing: norm(trees.iter().map(|t| tree.cubes[t.root].mass).sum()),
        root_prime_packing: norm(trees.iter().map(|t| tree.cubes[t.root_prime].mass).sum()),
        max_prime_multiplicity: mult.values().copied().max().unwrap_or(0),
        trees,
    }
}

/// Checks that the trees partition the members and satisfy the tree axioms.
pub fn check_corona(tree: &CubeTree, corona: &Corona, member: impl Fn(usize) -> bool) -> Result<()> {
    let desc = tree.descendants(corona.q0);
    let mut owner = vec![usize::MAX; tree.cubes.len()];
    for (k, t) in corona.trees.iter().enumerate() {
        for &q in &t.cubes {
            if owner[q] != usize::MAX {
                return Err(Error::Invariant(format!("cube {q} in two trees")));
            }
            owner[q] = k;
        }
    }
    for &q in &desc {
        if member(q) != (owner[q] != usize::MAX) {
            return Err(Error::Invariant(format!("cube {q} membership and tree assignment disagree")));
        }
    }
    for (k, t) in corona.trees.iter().enumerate() {
        let root_level = tree.cubes[t.root].level;
        for &q in &t.cubes {
            if q != t.root {
                // convexity: the whole chain up to the root is in the tree
                if tree.cubes[q].level >= root_level {
                    return Err(Error::Invariant(format!("tree {k} root is not maximal")));
                }
                let p = tree.cubes[q].parent.ok_or_else(|| Error::Invariant("orphan cube".into()))?;
                if owner[p] != k {
                    return Err(Error::Invariant(format!("tree {k} is not convex at cube {q}")));
                }
            }
            let ch = &tree.cubes[q].children;
            let inside = ch.iter().filter(|&&c| owner[c] == k).count();
            if inside != 0 && inside != ch.len() {
                return Err(Error::Invariant(format!("tree {k} takes some but not all children of {q}")));
            }
            if (inside == 0) != t.stop.binary_search(&q).is_ok() {
                return Err(Error::Invariant(format!("stop set of tree {k} is wrong at {q}")));
            }
        }
    }
    Ok(())
}
