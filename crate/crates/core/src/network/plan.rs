//! Contraction cost model and order planning.
//!
//! Contracting two tensors costs the product of the extents of every mode
//! involved (free and contracted, shared modes counted once). The result of a
//! step keeps the name of its left operand.

use std::fmt;

use super::TensorNetwork;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Most nodes the exhaustive planner accepts.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Minimum total cost over all binary contraction trees.
    Exhaustive,
    /// Repeatedly contract the cheapest pair.
    Greedy,
    /// A user-supplied sequence of `(left, right)` node names.
    Given(Vec<(String, String)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanStep {
    pub left: String,
    pub right: String,
    pub cost: u64,
    /// Element count of the intermediate produced by this step.
    pub size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ContractionPlan {
    pub steps: Vec<PlanStep>,
    pub total_cost: u64,
    /// Largest single-step cost.
    pub peak_cost: u64,
    /// Largest intermediate element count.
    pub peak_size: u64,
}

impl fmt::Display for ContractionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {}: ({}, {}) cost {}", k + 1, s.left, s.right, s.cost)?;
        }
        write!(
            f,
            "total cost {}, peak step cost {}, peak size {}",
            self.total_cost, self.peak_cost, self.peak_size
        )
    }
}

fn overflow() -> Error {
    Error::Plan("contraction cost overflows 64-bit integers".into())
}

/// Label bookkeeping shared by all strategies: each label is an index into
/// `extents`, and each group tracks its open labels in tensor-product order.
pub(crate) struct Sim {
    pub names: Vec<String>,
    pub label_names: Vec<String>,
    pub labels: Vec<Vec<usize>>,
    pub alive: Vec<bool>,
    pub extents: Vec<u64>,
    pub endpoints: Vec<u32>,
    pub is_output: Vec<bool>,
}

impl Sim {
    pub fn new<T: Scalar>(net: &TensorNetwork<T>) -> Self {
        let mut label_names: Vec<&String> = Vec::new();
        let mut labels = Vec::new();
        let mut extents = Vec::new();
        let mut endpoints: Vec<u32> = Vec::new();
        for (k, node) in net.nodes().iter().enumerate() {
            let mut ids = Vec::new();
            for (m, l) in node.labels.iter().enumerate() {
                let id = match label_names.iter().position(|x| *x == l) {
                    Some(id) => id,
                    None => {
                        label_names.push(l);
                        extents.push(node.tensor.extents()[m] as u64);
                        endpoints.push(0);
                        label_names.len() - 1
                    }
                };
                endpoints[id] |= 1 << k;
                ids.push(id);
            }
            labels.push(ids);
        }
        let is_output = label_names.iter().map(|l| net.output().contains(l)).collect();
        Sim {
            names: net.nodes().iter().map(|n| n.name.clone()).collect(),
            label_names: label_names.into_iter().cloned().collect(),
            labels,
            alive: vec![true; net.nodes().len()],
            extents,
            endpoints,
            is_output,
        }
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        (0..self.names.len()).find(|&k| self.alive[k] && self.names[k] == name)
    }

    fn product(&self, ids: impl Iterator<Item = usize>) -> Result<u64> {
        ids.map(|l| self.extents[l])
            .try_fold(1u64, |acc, e| acc.checked_mul(e))
            .ok_or_else(overflow)
    }

    /// Cost of contracting live groups `a` and `b`.
    pub fn cost(&self, a: usize, b: usize) -> Result<u64> {
        let extra = self.labels[b].iter().copied().filter(|l| !self.labels[a].contains(l));
        self.product(self.labels[a].iter().copied().chain(extra))
    }

    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.labels[a].iter().any(|l| self.labels[b].contains(l))
    }

    /// Merges `b` into `a`; returns the step record.
    pub fn contract(&mut self, a: usize, b: usize) -> Result<PlanStep> {
        let cost = self.cost(a, b)?;
        let la = std::mem::take(&mut self.labels[a]);
        let lb = std::mem::take(&mut self.labels[b]);
        let merged: Vec<usize> = la
            .iter()
            .copied()
            .filter(|l| !lb.contains(l))
            .chain(lb.iter().copied().filter(|l| !la.contains(l)))
            .collect();
        let size = self.product(merged.iter().copied())?;
        self.labels[a] = merged;
        self.alive[b] = false;
        Ok(PlanStep {
            left: self.names[a].clone(),
            right: self.names[b].clone(),
            cost,
            size,
        })
    }

    pub fn live_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }
}

/// Cost of contracting nodes `a` and `b` directly.
pub fn pair_cost<T: Scalar>(net: &TensorNetwork<T>, a: &str, b: &str) -> Result<u64> {
    let ia = net.node_index(a)?;
    let ib = net.node_index(b)?;
    if ia == ib {
        return Err(Error::arg(format!("cannot pair node '{a}' with itself")));
    }
    Sim::new(net).cost(ia, ib)
}

fn finish(steps: Vec<PlanStep>) -> Result<ContractionPlan> {
    let mut total = 0u64;
    for s in &steps {
        total = total.checked_add(s.cost).ok_or_else(overflow)?;
    }
    Ok(ContractionPlan {
        total_cost: total,
        peak_cost: steps.iter().map(|s| s.cost).max().unwrap_or(0),
        peak_size: steps.iter().map(|s| s.size).max().unwrap_or(0),
        steps,
    })
}

pub fn plan<T: Scalar>(net: &TensorNetwork<T>, strategy: &Strategy) -> Result<ContractionPlan> {
    match strategy {
        Strategy::Given(order) => plan_given(net, order),
        Strategy::Greedy => plan_greedy(net),
        Strategy::Exhaustive => plan_exhaustive(net),
    }
}

fn plan_given<T: Scalar>(net: &TensorNetwork<T>, order: &[(String, String)]) -> Result<ContractionPlan> {
    let mut sim = Sim::new(net);
    let mut steps = Vec::with_capacity(order.len());
    for (k, (a, b)) in order.iter().enumerate() {
        let fail = |why: String| Error::Plan(format!("step {} ({a}, {b}): {why}", k + 1));
        let ia = sim.find(a).ok_or_else(|| fail(format!("no live node '{a}'")))?;
        let ib = sim.find(b).ok_or_else(|| fail(format!("no live node '{b}'")))?;
        if ia == ib {
            return Err(fail("a node cannot be contracted with itself".into()));
        }
        steps.push(sim.contract(ia, ib)?);
    }
    if sim.live_count() != 1 {
        return Err(Error::Plan(format!(
            "plan leaves {} nodes uncontracted",
            sim.live_count()
        )));
    }
    finish(steps)
}

fn plan_greedy<T: Scalar>(net: &TensorNetwork<T>) -> Result<ContractionPlan> {
    let mut sim = Sim::new(net);
    let mut steps = Vec::new();
    while sim.live_count() > 1 {
        let live: Vec<usize> = (0..sim.names.len()).filter(|&k| sim.alive[k]).collect();
        // (disconnected, cost, left name, right name) is minimized
        let mut best: Option<(bool, u64, &str, &str, usize, usize)> = None;
        for (x, &p) in live.iter().enumerate() {
            for &q in &live[x + 1..] {
                let (a, b) = if sim.names[p] <= sim.names[q] { (p, q) } else { (q, p) };
                let key = (
                    !sim.connected(a, b),
                    sim.cost(a, b)?,
                    sim.names[a].as_str(),
                    sim.names[b].as_str(),
                );
                if best.is_none_or(|b| key < (b.0, b.1, b.2, b.3)) {
                    best = Some((key.0, key.1, key.2, key.3, a, b));
                }
            }
        }
        let (.., a, b) = best.expect("at least two live nodes");
        steps.push(sim.contract(a, b)?);
    }
    finish(steps)
}

fn plan_exhaustive<T: Scalar>(net: &TensorNetwork<T>) -> Result<ContractionPlan> {
    let n = net.nodes().len();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::Plan(format!(
            "exhaustive planning supports at most {EXHAUSTIVE_LIMIT} nodes, network has {n}"
        )));
    }
    let sim = Sim::new(net);
    let full: usize = (1 << n) - 1;

    // open labels of every subset
    let open: Vec<Vec<usize>> = (0..=full)
        .map(|s| {
            (0..sim.extents.len())
                .filter(|&l| {
                    let e = sim.endpoints[l] as usize;
                    e & s != 0 && (e & !s != 0 || sim.is_output[l])
                })
                .collect()
        })
        .collect();
    let step_cost = |s1: usize, s2: usize| -> Option<u64> {
        let extra = open[s2].iter().filter(|l| !open[s1].contains(l));
        open[s1]
            .iter()
            .chain(extra)
            .try_fold(1u64, |acc, &l| acc.checked_mul(sim.extents[l]))
    };

    // best[s] = (total cost, left part); None marks overflow
    let mut best: Vec<Option<(u64, usize)>> = vec![None; full + 1];
    for k in 0..n {
        best[1 << k] = Some((0, 0));
    }
    for s in 1..=full {
        if s.count_ones() < 2 {
            continue;
        }
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        // enumerate s1 = low | subset of rest, excluding s itself
        let mut sub = rest;
        loop {
            let s1 = low | sub;
            if s1 != s {
                let s2 = s ^ s1;
                if let (Some((c1, _)), Some((c2, _))) = (best[s1], best[s2]) {
                    let total = step_cost(s1, s2)
                        .and_then(|c| c.checked_add(c1))
                        .and_then(|c| c.checked_add(c2));
                    if let Some(t) = total {
                        if best[s].is_none_or(|(b, _)| t < b) {
                            best[s] = Some((t, s1));
                        }
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    if best[full].is_none() {
        return Err(overflow());
    }

    // replay the tree bottom-up so step records come from the simulator
    let mut order = Vec::new();
    fn collect(s: usize, best: &[Option<(u64, usize)>], order: &mut Vec<(usize, usize)>) -> usize {
        if s.count_ones() == 1 {
            return s.trailing_zeros() as usize;
        }
        let s1 = best[s].expect("reachable subset").1;
        let a = collect(s1, best, order);
        let b = collect(s ^ s1, best, order);
        order.push((a, b));
        a
    }
    collect(full, &best, &mut order);
    let mut sim = sim;
    let steps = order
        .into_iter()
        .map(|(a, b)| sim.contract(a, b))
        .collect::<Result<Vec<_>>>()?;
    finish(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Node;
    use crate::tensor::DenseTensor;

    fn abv(i: usize) -> TensorNetwork<f64> {
        TensorNetwork::new(
            vec![
                Node::new("A", &["i", "j"], DenseTensor::ramp(vec![i, i]).unwrap()),
                Node::new("B", &["j", "k"], DenseTensor::ramp(vec![i, i]).unwrap()),
                Node::new("v", &["k"], DenseTensor::ramp(vec![i]).unwrap()),
            ],
            vec!["i".into()],
        )
        .unwrap()
    }

    fn given(steps: &[(&str, &str)]) -> Strategy {
        Strategy::Given(steps.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect())
    }

    #[test]
    fn pair_costs() {
        let net = abv(8);
        assert_eq!(pair_cost(&net, "A", "B").unwrap(), 512);
        assert_eq!(pair_cost(&net, "B", "v").unwrap(), 64);
        assert!(pair_cost(&net, "A", "A").is_err());
        assert!(matches!(pair_cost(&net, "A", "Q"), Err(Error::Argument(_))));
    }

    #[test]
    fn abv_strategies() {
        let net = abv(8);
        let ex = plan(&net, &Strategy::Exhaustive).unwrap();
        assert_eq!((ex.steps[0].left.as_str(), ex.steps[0].right.as_str()), ("B", "v"));
        assert_eq!(ex.total_cost, 128);
        let gr = plan(&net, &Strategy::Greedy).unwrap();
        assert_eq!(gr.total_cost, 128);
        let left = plan(&net, &given(&[("A", "B"), ("A", "v")])).unwrap();
        assert_eq!(left.total_cost, 512 + 64);
        assert_eq!(left.peak_cost, 512);
        assert_eq!(left.peak_size, 64);
    }

    #[test]
    fn given_order_errors_name_the_step() {
        let net = abv(2);
        match plan(&net, &given(&[("A", "B"), ("B", "v")])) {
            Err(Error::Plan(m)) => assert!(m.contains("step 2"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(plan(&net, &given(&[("A", "B")])).is_err());
        assert!(plan(&net, &given(&[("A", "A")])).is_err());
    }

    #[test]
    fn single_node_plan_is_empty() {
        let net = TensorNetwork::new(
            vec![Node::new("A", &["i"], DenseTensor::<f64>::ramp(vec![3]).unwrap())],
            vec!["i".into()],
        )
        .unwrap();
        for s in [Strategy::Exhaustive, Strategy::Greedy, given(&[])] {
            let p = plan(&net, &s).unwrap();
            assert!(p.steps.is_empty());
            assert_eq!(p.total_cost, 0);
        }
    }

    #[test]
    fn overflow_is_an_error() {
        let big = 1usize << 22;
        let net = TensorNetwork::new(
            vec![
                Node::new("A", &["i"], DenseTensor::<f64>::zeros(vec![big]).unwrap()),
                Node::new("B", &["j"], DenseTensor::<f64>::zeros(vec![big]).unwrap()),
                Node::new("C", &["k"], DenseTensor::<f64>::zeros(vec![big]).unwrap()),
            ],
            vec!["i".into(), "j".into(), "k".into()],
        )
        .unwrap();
        assert_eq!(plan(&net, &Strategy::Greedy).unwrap_err(), overflow());
        assert_eq!(plan(&net, &Strategy::Exhaustive).unwrap_err(), overflow());
    }
}
