use super::{branch_maps, ProtocolError, Tree, TreeOp};
use crate::lop::{register_permutation, SystemLayout};
use crate::qcore::{CMat, QuantumChannel};

/// Kraus operators of `k` followed by tracing out every register of `layout`
/// not named in `keep`; outputs are ordered as `keep`. All-zero operators are dropped.
pub fn reduced_kraus(k: &CMat, layout: &SystemLayout, keep: &[&str]) -> Result<Vec<CMat>, ProtocolError> {
    let mut order = keep.iter().map(|n| layout.require(n)).collect::<Result<Vec<_>, _>>()?;
    let kept = order.clone();
    order.extend((0..layout.len()).filter(|i| !kept.contains(i)));
    let dims = layout.dims();
    let kd: usize = kept.iter().map(|&i| dims[i]).product();
    let rd = layout.total_dim() / kd;
    let pk = register_permutation(&dims, &order) * k;
    let mut out = Vec::new();
    for e in 0..rd {
        let m = CMat::from_fn(kd, k.ncols(), |r, c| pk[(r * rd + e, c)]);
        if m.iter().any(|z| z.norm() > 0.0) {
            out.push(m);
        }
    }
    Ok(out)
}

/// Channel from the input of `embed` to the `keep` registers: `embed` maps the
/// chosen input space into the protocol's input layout (fixing ancillas).
pub fn effective_channel<Op: TreeOp>(
    tree: &Tree<Op>,
    layout: &SystemLayout,
    embed: &CMat,
    keep: &[&str],
) -> Result<QuantumChannel, ProtocolError> {
    let mut ks = Vec::new();
    for b in branch_maps(tree, layout, embed)? {
        ks.extend(reduced_kraus(&b.kraus, &b.layout, keep)?);
    }
    Ok(QuantumChannel::new(ks)?)
}

/// State of the named registers, in the listed order.
pub fn reduce_named(rho: &CMat, layout: &SystemLayout, keep: &[&str]) -> Result<CMat, ProtocolError> {
    let order = keep.iter().map(|n| layout.require(n)).collect::<Result<Vec<_>, _>>()?;
    Ok(crate::qcore::reduce(rho, &layout.dims(), &order)?)
}
