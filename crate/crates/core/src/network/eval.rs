use super::plan::{ContractionPlan, Sim};
use super::TensorNetwork;
use crate::error::{Error, Result};
use crate::products::{tensor_product, ModePairing};
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

/// Evaluates `net` by executing the pairwise steps of `plan`, then arranges
/// the result modes in output-label order.
pub fn evaluate<T: Scalar>(net: &TensorNetwork<T>, plan: &ContractionPlan) -> Result<DenseTensor<T>> {
    // the simulator checks the plan against the network
    let mut sim = Sim::new(net);
    let mut tensors: Vec<Option<DenseTensor<T>>> =
        net.nodes().iter().map(|n| Some(n.tensor.clone())).collect();
    for (k, step) in plan.steps.iter().enumerate() {
        let fail = |why: &str| {
            Error::Plan(format!(
                "step {} ({}, {}) does not fit the network: {why}",
                k + 1,
                step.left,
                step.right
            ))
        };
        let a = sim.find(&step.left).ok_or_else(|| fail("unknown left node"))?;
        let b = sim.find(&step.right).ok_or_else(|| fail("unknown right node"))?;
        if a == b {
            return Err(fail("node paired with itself"));
        }
        let pairs: Vec<(usize, usize)> = sim.labels[a]
            .iter()
            .enumerate()
            .filter_map(|(pa, l)| {
                sim.labels[b].iter().position(|x| x == l).map(|pb| (pa + 1, pb + 1))
            })
            .collect();
        let ta = tensors[a].take().expect("live node has a tensor");
        let tb = tensors[b].take().expect("live node has a tensor");
        let rec = sim.contract(a, b)?;
        if rec.cost != step.cost {
            return Err(fail("recorded cost differs from the cost model"));
        }
        tensors[a] = Some(tensor_product(&ta, &tb, &ModePairing::new(pairs))?);
    }
    if sim.live_count() != 1 {
        return Err(Error::Plan(format!(
            "plan leaves {} nodes uncontracted",
            sim.live_count()
        )));
    }
    let last = (0..sim.alive.len()).find(|&k| sim.alive[k]).expect("one live node");
    let result = tensors[last].take().expect("live node has a tensor");

    let ids = &sim.labels[last];
    let mut perm = Vec::with_capacity(ids.len());
    for name in net.output() {
        let pos = ids
            .iter()
            .position(|&id| sim.label_names[id] == *name)
            .ok_or_else(|| Error::Plan(format!("output label '{name}' missing after evaluation")))?;
        perm.push(pos + 1);
    }
    if perm.iter().enumerate().all(|(k, &p)| p == k + 1) {
        Ok(result)
    } else {
        result.permute(&perm)
    }
}
