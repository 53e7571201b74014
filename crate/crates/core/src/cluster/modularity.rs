use alloc::collections::BTreeMap;

use crate::{DocId, Error, Result};

/// Weighted modularity `Q = 1/2m * sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)`.
///
/// Each undirected edge `(u, v, w)` contributes `w` to both `A_uv` and `A_vu`
/// (a self-loop contributes `2w` to `A_uu`). Nodes absent from `communities`
/// form singleton communities.
pub fn modularity(communities: &BTreeMap<DocId, u64>, edges: &[(DocId, DocId, f64)]) -> Result<f64> {
    #[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
    enum Community {
        Assigned(u64),
        Alone(DocId),
    }
    let community = |d: DocId| communities.get(&d).map_or(Community::Alone(d), |&c| Community::Assigned(c));

    let mut two_m = 0.0;
    // per community: sum of A_ij inside it, sum of degrees
    let mut inside: BTreeMap<Community, f64> = BTreeMap::new();
    let mut degree: BTreeMap<Community, f64> = BTreeMap::new();
    for &(u, v, w) in edges {
        if w < 0.0 {
            return Err(Error::NegativeWeight);
        }
        let (cu, cv) = (community(u), community(v));
        two_m += 2.0 * w;
        *degree.entry(cu).or_default() += w;
        *degree.entry(cv).or_default() += w;
        if cu == cv {
            *inside.entry(cu).or_default() += 2.0 * w;
        }
    }
    if two_m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let mut q = 0.0;
    for (c, k) in &degree {
        let a = inside.get(c).copied().unwrap_or(0.0);
        q += a / two_m - (k / two_m) * (k / two_m);
    }
    Ok(q)
}
