//! Tensor networks: named nodes whose modes carry labels. A label shared by
//! two nodes is a contracted edge; a label on a single node is a free mode and
//! must appear in the output list.

mod eval;
mod parse;
mod plan;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use eval::evaluate;
pub use parse::{parse_network, read_network};
pub use plan::{pair_cost, plan, ContractionPlan, PlanStep, Strategy};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

#[derive(Clone, Debug, PartialEq)]
pub struct Node<T> {
    pub name: String,
    pub labels: Vec<String>,
    pub tensor: DenseTensor<T>,
}

impl<T: Scalar> Node<T> {
    pub fn new(
        name: impl Into<String>,
        labels: &[&str],
        tensor: DenseTensor<T>,
    ) -> Self {
        Node {
            name: name.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            tensor,
        }
    }
}

/// A validated tensor network.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorNetwork<T> {
    nodes: Vec<Node<T>>,
    output: Vec<String>,
    extents: BTreeMap<String, usize>,
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl<T: Scalar> TensorNetwork<T> {
    pub fn new(nodes: Vec<Node<T>>, output: Vec<String>) -> Result<Self> {
        let mut seen_names = BTreeMap::new();
        let mut uses: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut extents: BTreeMap<String, usize> = BTreeMap::new();
        for (k, node) in nodes.iter().enumerate() {
            if !is_ident(&node.name) {
                return Err(Error::Network(format!("invalid node name '{}'", node.name)));
            }
            if seen_names.insert(node.name.clone(), k).is_some() {
                return Err(Error::Network(format!("duplicate node name '{}'", node.name)));
            }
            if node.labels.len() != node.tensor.order() {
                return Err(Error::Network(format!(
                    "node '{}' has {} labels but its tensor has order {}",
                    node.name,
                    node.labels.len(),
                    node.tensor.order()
                )));
            }
            for (m, label) in node.labels.iter().enumerate() {
                if !is_ident(label) {
                    return Err(Error::Network(format!("invalid label '{label}'")));
                }
                if node.labels[..m].contains(label) {
                    return Err(Error::Network(format!(
                        "label '{label}' repeats within node '{}'; use the trace operation",
                        node.name
                    )));
                }
                let e = node.tensor.extents()[m];
                if let Some(&prev) = extents.get(label) {
                    if prev != e {
                        return Err(Error::Network(format!(
                            "label '{label}' has extent {prev} elsewhere but {e} on node '{}'",
                            node.name
                        )));
                    }
                }
                extents.insert(label.clone(), e);
                uses.entry(label.clone()).or_default().push(k);
            }
        }
        for (label, at) in &uses {
            if at.len() > 2 {
                return Err(Error::Network(format!(
                    "label '{label}' appears on {} nodes; each label must join at most two",
                    at.len()
                )));
            }
        }
        for (m, label) in output.iter().enumerate() {
            if output[..m].contains(label) {
                return Err(Error::Network(format!("output label '{label}' repeats")));
            }
            match uses.get(label).map(Vec::len) {
                Some(1) => {}
                Some(_) => {
                    return Err(Error::Network(format!(
                        "output label '{label}' is contracted between two nodes"
                    )))
                }
                None => {
                    return Err(Error::Network(format!(
                        "output label '{label}' does not appear on any node"
                    )))
                }
            }
        }
        for (label, at) in &uses {
            if at.len() == 1 && !output.contains(label) {
                return Err(Error::Network(format!(
                    "free label '{label}' must be listed in the output"
                )));
            }
        }
        if nodes.is_empty() {
            return Err(Error::Network("network has no nodes".into()));
        }
        Ok(TensorNetwork {
            nodes,
            output,
            extents,
        })
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Option<&Node<T>> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub(crate) fn node_index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| Error::arg(format!("unknown node '{name}'")))
    }

    pub fn output(&self) -> &[String] {
        &self.output
    }

    pub fn extent(&self, label: &str) -> Option<usize> {
        self.extents.get(label).copied()
    }

    /// Output shape after evaluation.
    pub fn output_extents(&self) -> Vec<usize> {
        self.output.iter().map(|l| self.extents[l]).collect()
    }

    /// Labels joining two nodes, in a deterministic order.
    pub fn shared_labels(&self) -> Vec<String> {
        self.extents
            .keys()
            .filter(|l| !self.output.contains(l))
            .cloned()
            .collect()
    }

    /// Text form with inline data; parsing it gives back an identical
    /// network.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for node in &self.nodes {
            let _ = write!(s, "node {} [", node.name);
            for (m, l) in node.labels.iter().enumerate() {
                if m > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{l}:{}", node.tensor.extents()[m]);
            }
            s.push_str("] =");
            for v in node.tensor.data() {
                s.push(' ');
                s.push_str(&fmt_f64(v.as_f64()));
            }
            s.push('\n');
        }
        let _ = writeln!(s, "output [{}]", self.output.join(","));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type T = DenseTensor<f64>;

    fn node(name: &str, labels: &[&str], ext: Vec<usize>) -> Node<f64> {
        Node::new(name, labels, T::ramp(ext).unwrap())
    }

    #[test]
    fn validates_arity_and_extents() {
        let ok = TensorNetwork::new(
            vec![node("A", &["i", "j"], vec![2, 3]), node("B", &["j", "k"], vec![3, 4])],
            vec!["i".into(), "k".into()],
        )
        .unwrap();
        assert_eq!(ok.output_extents(), vec![2, 4]);
        assert_eq!(ok.shared_labels(), vec!["j".to_string()]);

        let three = TensorNetwork::new(
            vec![
                node("A", &["i", "j"], vec![2, 3]),
                node("B", &["j"], vec![3]),
                node("C", &["j"], vec![3]),
            ],
            vec!["i".into()],
        );
        assert!(matches!(three, Err(Error::Network(m)) if m.contains("3 nodes")));

        let mismatch = TensorNetwork::new(
            vec![node("A", &["i", "j"], vec![2, 3]), node("B", &["j"], vec![4])],
            vec!["i".into()],
        );
        assert!(mismatch.is_err());

        let self_trace = TensorNetwork::new(vec![node("A", &["i", "i"], vec![2, 2])], vec![]);
        assert!(self_trace.is_err());

        let unlisted = TensorNetwork::new(vec![node("A", &["i"], vec![2])], vec![]);
        assert!(unlisted.is_err());

        let contracted_out = TensorNetwork::new(
            vec![node("A", &["i"], vec![2]), node("B", &["i"], vec![2])],
            vec!["i".into()],
        );
        assert!(contracted_out.is_err());

        let dup = TensorNetwork::new(
            vec![node("A", &["i"], vec![2]), node("A", &["j"], vec![2])],
            vec!["i".into(), "j".into()],
        );
        assert!(dup.is_err());
    }
}
