use rand::Rng;
use rand_distr::StandardNormal;

use super::moves::{GridAvailability, Region};
use super::Hyperparams;
use crate::tree::{node_depth, TreeHeap};
use crate::Error;

/// Draws one tree from the structure prior, leaves from the leaf prior.
///
/// Nodes are visited depth-first, left before right. A node with at least
/// one available split above the last level becomes internal with
/// probability `P_d`; its axis is uniform among axes with available splits
/// and its cutpoint uniform among those axes' available cutpoints.
pub fn sample_prior_tree<R: Rng + ?Sized>(
    avail: &GridAvailability,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<TreeHeap, Error> {
    hp.validate()?;
    let mut tree = TreeHeap::root_only(hp.max_depth, 0.0)?;
    grow_from(&mut tree, 1, Region::root(), avail, hp, rng);
    Ok(tree)
}

fn grow_from<R: Rng + ?Sized>(
    tree: &mut TreeHeap,
    t: usize,
    region: Region,
    avail: &GridAvailability,
    hp: &Hyperparams,
    rng: &mut R,
) {
    let depth = node_depth(t);
    let n_axes = region.n_axes(avail);
    let splits = depth + 1 < hp.max_depth as u32
        && n_axes > 0
        && rng.random::<f64>() < hp.split_probability(depth);
    if !splits {
        let z: f64 = rng.sample(StandardNormal);
        tree.leaf_value[t] = (hp.leaf_mean + hp.leaf_sd * z) as f32;
        return;
    }
    let k = ((rng.random::<f64>() * n_axes as f64) as u32).min(n_axes - 1);
    let axis = region.nth_axis(k, avail);
    let n_splits = region.n_splits(axis as usize, avail);
    let offset = ((rng.random::<f64>() * n_splits as f64) as u32).min(n_splits - 1);
    let split = region.first_split(axis) + offset as u8;
    tree.split_leaf(t, axis, split);
    grow_from(tree, 2 * t, region.child(axis, split, false, avail), avail, hp, rng);
    grow_from(tree, 2 * t + 1, region.child(axis, split, true, avail), avail, hp, rng);
}

