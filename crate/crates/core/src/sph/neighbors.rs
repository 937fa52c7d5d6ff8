use super::Vec2;
use crate::prelude::*;

/// One neighbour `j` of particle `i`, with `r = x_i − x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub j: usize,
    pub r: Vec2,
    pub dist: f64,
}

/// Per-particle neighbours strictly inside the cutoff, self excluded,
/// sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub cutoff: f64,
    pub lists: Vec<Vec<Neighbor>>,
}

impl NeighborList {
    pub fn of(&self, i: usize) -> &[Neighbor] {
        &self.lists[i]
    }

    pub fn n_pairs(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }
}

fn neighbor(positions: &[Vec2], i: usize, j: usize) -> Neighbor {
    let r = [positions[i][0] - positions[j][0], positions[i][1] - positions[j][1]];
    Neighbor {
        j,
        r,
        dist: (r[0] * r[0] + r[1] * r[1]).sqrt(),
    }
}

/// Cell-list fixed-radius search with cell size equal to the cutoff.
pub fn build_neighbors(positions: &[Vec2], cutoff: f64) -> NeighborList {
    let n = positions.len();
    if n == 0 {
        return NeighborList { cutoff, lists: Vec::new() };
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in positions {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let dims: [usize; 2] = core::array::from_fn(|a| (((hi[a] - lo[a]) / cutoff).floor() as usize) + 1);
    let cell_of = |p: &Vec2| -> [usize; 2] {
        core::array::from_fn(|a| (((p[a] - lo[a]) / cutoff).floor() as usize).min(dims[a] - 1))
    };
    // Counting sort of particles by cell.
    let mut start = vec![0usize; dims[0] * dims[1] + 1];
    let cells: Vec<usize> = positions
        .iter()
        .map(|p| {
            let c = cell_of(p);
            c[1] * dims[0] + c[0]
        })
        .collect();
    for &c in &cells {
        start[c + 1] += 1;
    }
    for k in 0..start.len() - 1 {
        start[k + 1] += start[k];
    }
    let mut fill = start.clone();
    let mut sorted = vec![0usize; n];
    for (i, &c) in cells.iter().enumerate() {
        sorted[fill[c]] = i;
        fill[c] += 1;
    }
    let lists = crate::par::map_range(n, |i| {
        let c = cell_of(&positions[i]);
        let mut out = Vec::new();
        for cy in c[1].saturating_sub(1)..=(c[1] + 1).min(dims[1] - 1) {
            for cx in c[0].saturating_sub(1)..=(c[0] + 1).min(dims[0] - 1) {
                let cell = cy * dims[0] + cx;
                for &j in &sorted[start[cell]..start[cell + 1]] {
                    if j == i {
                        continue;
                    }
                    let nb = neighbor(positions, i, j);
                    if nb.dist < cutoff {
                        out.push(nb);
                    }
                }
            }
        }
        out.sort_unstable_by_key(|nb| nb.j);
        out
    });
    NeighborList { cutoff, lists }
}

/// O(N²) reference search.
pub fn brute_force_neighbors(positions: &[Vec2], cutoff: f64) -> NeighborList {
    let lists = (0..positions.len())
        .map(|i| {
            (0..positions.len())
                .filter(|&j| j != i)
                .map(|j| neighbor(positions, i, j))
                .filter(|nb| nb.dist < cutoff)
                .collect()
        })
        .collect();
    NeighborList { cutoff, lists }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_particles() {
        let h = 0.1;
        let far = build_neighbors(&[[0.0, 0.0], [3.0 * h, 0.0]], 2.0 * h);
        assert_eq!(far.n_pairs(), 0);
        let near = build_neighbors(&[[0.0, 0.0], [h, 0.0]], 2.0 * h);
        assert_eq!(near.of(0).len(), 1);
        assert_eq!(near.of(1)[0].j, 0);
        assert_eq!(near.of(0)[0].r, [-h, 0.0]);
        assert_eq!(near.of(1)[0].r, [h, 0.0]);
    }
}
