//! Equality Datalog: finitely many constants, `=` and `!=` only.

use crate::structure::FiniteStructure;
use crate::types::Name;

/// All set partitions of `0..n` as restricted-growth strings, in
/// lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut rgs = vec![0u32; n];
    fn go(i: usize, max: u32, rgs: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == rgs.len() {
            out.push(rgs.clone());
            return;
        }
        for b in 0..=max + 1 {
            if i == 0 && b > 0 {
                break;
            }
            rgs[i] = b;
            go(i + 1, max.max(b), rgs, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    go(0, 0, &mut rgs, &mut out);
    out
}

/// One structure per partition of the constants: the carrier is the set of
/// blocks (named after their first constant), each constant denotes its
/// block and `=` is identity of blocks.
pub fn partition_structures(consts: &[Name]) -> Vec<FiniteStructure> {
    partitions(consts.len())
        .into_iter()
        .map(|rgs| partition_structure(consts, &rgs))
        .collect()
}

pub fn partition_structure(consts: &[Name], rgs: &[u32]) -> FiniteStructure {
    let blocks = rgs.iter().copied().max().map_or(0, |m| m as usize + 1);
    let carrier: Vec<Name> = (0..blocks)
        .map(|b| {
            let first = rgs.iter().position(|x| *x as usize == b).expect("block is nonempty");
            consts[first].clone()
        })
        .collect();
    let mut s = FiniteStructure::new("I", carrier);
    for (c, b) in consts.iter().zip(rgs) {
        s.add_function(c.clone(), 0, vec![*b]).expect("valid block");
    }
    s
}
