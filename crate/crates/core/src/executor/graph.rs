use std::fmt;
use std::str::FromStr;

use crate::error::ScheduleError;

/// Kernels of one substep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KernelId {
    EdgeBase,
    EdgeCorrection,
    ElemRhsBase,
    ElemRhsCorrection,
    /// Unseparated edge flux over the full active orders.
    Edge,
    /// Unseparated element flux and right-hand side.
    ElemRhs,
    RkSubstepAdditions,
    MinDepth,
    SolveUH,
    BcComputation,
    Indicator,
}

/// Which part of the order-separated computation a flux kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    Base,
    Correction,
    Full,
}

impl KernelId {
    pub const ALL: [KernelId; 11] = [
        KernelId::EdgeBase,
        KernelId::EdgeCorrection,
        KernelId::ElemRhsBase,
        KernelId::ElemRhsCorrection,
        KernelId::Edge,
        KernelId::ElemRhs,
        KernelId::RkSubstepAdditions,
        KernelId::MinDepth,
        KernelId::SolveUH,
        KernelId::BcComputation,
        KernelId::Indicator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelId::EdgeBase => "edge_base",
            KernelId::EdgeCorrection => "edge_correction",
            KernelId::ElemRhsBase => "elem_rhs_base",
            KernelId::ElemRhsCorrection => "elem_rhs_correction",
            KernelId::Edge => "edge",
            KernelId::ElemRhs => "elem_rhs",
            KernelId::RkSubstepAdditions => "rk_substep_additions",
            KernelId::MinDepth => "min_depth",
            KernelId::SolveUH => "solve_uH",
            KernelId::BcComputation => "bc_computation",
            KernelId::Indicator => "indicator",
        }
    }

    /// Flux kernels run in the parallel phase.
    pub fn is_flux(self) -> bool {
        self.layer().is_some()
    }

    pub fn layer(self) -> Option<Layer> {
        match self {
            KernelId::EdgeBase | KernelId::ElemRhsBase => Some(Layer::Base),
            KernelId::EdgeCorrection | KernelId::ElemRhsCorrection => Some(Layer::Correction),
            KernelId::Edge | KernelId::ElemRhs => Some(Layer::Full),
            _ => None,
        }
    }

    /// Residual buffer written by a flux kernel.
    pub fn buffer_slot(self) -> Option<usize> {
        match self {
            KernelId::EdgeBase | KernelId::Edge => Some(0),
            KernelId::EdgeCorrection => Some(1),
            KernelId::ElemRhsBase | KernelId::ElemRhs => Some(2),
            KernelId::ElemRhsCorrection => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelId {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KernelId::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| ScheduleError::UnknownKernel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kernel: KernelId,
    /// Indices of nodes that must finish first.
    pub deps: Vec<usize>,
}

/// Substep pipeline: a parallel phase of flux kernels, a barrier, then a
/// chain of sequential kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelGraph {
    pub separated: bool,
    pub dynamic: bool,
    nodes: Vec<Node>,
}

/// Builds the pipeline; `dynamic` appends the indicator at the end of the step.
pub fn build_kernel_graph(separated: bool, dynamic: bool) -> KernelGraph {
    let flux: &[KernelId] = if separated {
        &[
            KernelId::EdgeBase,
            KernelId::EdgeCorrection,
            KernelId::ElemRhsBase,
            KernelId::ElemRhsCorrection,
        ]
    } else {
        &[KernelId::Edge, KernelId::ElemRhs]
    };
    let mut nodes: Vec<Node> = flux
        .iter()
        .map(|&kernel| Node {
            kernel,
            deps: Vec::new(),
        })
        .collect();
    let mut chain = vec![
        KernelId::RkSubstepAdditions,
        KernelId::MinDepth,
        KernelId::SolveUH,
        KernelId::BcComputation,
    ];
    if dynamic {
        chain.push(KernelId::Indicator);
    }
    for kernel in chain {
        let deps = if kernel == KernelId::RkSubstepAdditions {
            (0..flux.len()).collect()
        } else {
            vec![nodes.len() - 1]
        };
        nodes.push(Node { kernel, deps });
    }
    KernelGraph {
        separated,
        dynamic,
        nodes,
    }
}

impl KernelGraph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kernels(&self) -> Vec<KernelId> {
        self.nodes.iter().map(|n| n.kernel).collect()
    }

    pub fn contains(&self, kernel: KernelId) -> bool {
        self.nodes.iter().any(|n| n.kernel == kernel)
    }

    /// Flux kernels, in graph order.
    pub fn parallel_phase(&self) -> Vec<KernelId> {
        self.kernels().into_iter().filter(|k| k.is_flux()).collect()
    }

    /// Kernels after the barrier, in execution order.
    pub fn sequential_chain(&self) -> Vec<KernelId> {
        self.kernels().into_iter().filter(|k| !k.is_flux()).collect()
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<KernelId>> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = self.nodes.iter().map(|x| x.deps.len()).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(i) = ready.pop() {
            out.push(self.nodes[i].kernel);
            for (j, node) in self.nodes.iter().enumerate() {
                if node.deps.contains(&i) {
                    indegree[j] -= 1;
                    if indegree[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
        (out.len() == n).then_some(out)
    }
}
