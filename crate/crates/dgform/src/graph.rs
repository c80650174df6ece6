//! Graph abstraction types: the 9-node object subgraph (center + 8 boundary
//! nodes on a star-and-ring edge set) and the heterogeneous graph that adds
//! two manipulator nodes fully connected to every object node.

use crate::error::{DgformError, Result};
use serde::{Deserialize, Serialize};

pub const OBJECT_NODES: usize = 9;
pub const BOUNDARY_NODES: usize = 8;
pub const MANIP_NODES: usize = 2;
pub const OBJECT_EDGES: usize = 16;
pub const MANIP_OBJECT_EDGES: usize = MANIP_NODES * OBJECT_NODES;
/// Object node attribute dimension: board-frame x, y plus depth.
pub const OBJ_ATTR_DIM: usize = 3;
/// Manipulator node attribute dimension: a 7-dim board-frame pose.
pub const MANIP_ATTR_DIM: usize = 7;

/// One object node: board-frame position plus a depth reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectNode {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

/// The 9-node object state graph. Node 0 is the contour center; nodes 1..=8
/// are boundary nodes in angular order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSubgraph {
    pub nodes: Vec<ObjectNode>,
    /// 8 star edges (center to each boundary node) followed by 8 ring edges
    /// (each boundary node to its angular successor).
    pub edges: Vec<(usize, usize)>,
}

impl ObjectSubgraph {
    pub fn new(nodes: Vec<ObjectNode>) -> Result<Self> {
        if nodes.len() != OBJECT_NODES {
            return Err(DgformError::Contract(format!(
                "object subgraph needs {OBJECT_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        Ok(ObjectSubgraph { nodes, edges: canonical_object_edges() })
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != OBJECT_NODES {
            return Err(DgformError::Contract(format!(
                "object subgraph has {} nodes, expected {OBJECT_NODES}",
                self.nodes.len()
            )));
        }
        if self.edges != canonical_object_edges() {
            return Err(DgformError::Contract(
                "object subgraph edges are not the canonical star+ring set".into(),
            ));
        }
        if !self
            .nodes
            .iter()
            .all(|n| n.x.is_finite() && n.y.is_finite() && n.depth.is_finite())
        {
            return Err(DgformError::Contract("non-finite object node attribute".into()));
        }
        Ok(())
    }

    /// Row-major 9x3 attribute matrix (x, y, depth per node).
    pub fn attr_matrix(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(OBJECT_NODES * OBJ_ATTR_DIM);
        for n in &self.nodes {
            out.extend_from_slice(&[n.x, n.y, n.depth]);
        }
        out
    }

    pub fn from_attr_matrix(attrs: &[f64]) -> Result<Self> {
        if attrs.len() != OBJECT_NODES * OBJ_ATTR_DIM {
            return Err(DgformError::Contract(format!(
                "expected {} attrs, got {}",
                OBJECT_NODES * OBJ_ATTR_DIM,
                attrs.len()
            )));
        }
        let nodes = attrs
            .chunks(OBJ_ATTR_DIM)
            .map(|c| ObjectNode { x: c[0], y: c[1], depth: c[2] })
            .collect();
        Self::new(nodes)
    }
}

/// Star edges (0,1)..(0,8) then ring edges (1,2)..(7,8),(8,1).
pub fn canonical_object_edges() -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(OBJECT_EDGES);
    for b in 1..=BOUNDARY_NODES {
        edges.push((0, b));
    }
    for b in 1..=BOUNDARY_NODES {
        edges.push((b, b % BOUNDARY_NODES + 1));
    }
    edges
}

/// Heterogeneous snapshot: object subgraph plus two manipulator nodes with
/// full bipartite manipulator-object connectivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroGraph {
    pub object: ObjectSubgraph,
    /// Two board-frame end-effector poses (7 values each).
    pub manipulators: [[f64; MANIP_ATTR_DIM]; MANIP_NODES],
    /// (manipulator index, object index) pairs; always the full bipartite set.
    pub e_mo: Vec<(usize, usize)>,
}

impl HeteroGraph {
    pub fn new(object: ObjectSubgraph, manipulators: [[f64; MANIP_ATTR_DIM]; MANIP_NODES]) -> Result<Self> {
        object.validate()?;
        if manipulators.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DgformError::Contract("non-finite manipulator pose".into()));
        }
        Ok(HeteroGraph { object, manipulators, e_mo: full_bipartite_edges() })
    }

    /// Row-major 2x7 manipulator attribute matrix.
    pub fn manip_attr_matrix(&self) -> Vec<f64> {
        self.manipulators.iter().flatten().cloned().collect()
    }

    pub fn e_oo(&self) -> &[(usize, usize)] {
        &self.object.edges
    }
}

pub fn full_bipartite_edges() -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(MANIP_OBJECT_EDGES);
    for m in 0..MANIP_NODES {
        for o in 0..OBJECT_NODES {
            edges.push((m, o));
        }
    }
    edges
}

/// Interchange JSON schema: flat node and edge arrays with type labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeJson {
    #[serde(rename = "type")]
    pub node_type: String,
    pub attrs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeJson {
    #[serde(rename = "type")]
    pub edge_type: String,
    pub endpoints: [usize; 2],
}

impl From<&HeteroGraph> for GraphJson {
    /// Object nodes take global indices 0..=8, manipulator nodes 9..=10.
    fn from(g: &HeteroGraph) -> Self {
        let mut nodes: Vec<NodeJson> = g
            .object
            .nodes
            .iter()
            .map(|n| NodeJson { node_type: "object".into(), attrs: vec![n.x, n.y, n.depth] })
            .collect();
        for m in &g.manipulators {
            nodes.push(NodeJson { node_type: "manipulator".into(), attrs: m.to_vec() });
        }
        let mut edges: Vec<EdgeJson> = g
            .object
            .edges
            .iter()
            .map(|(a, b)| EdgeJson { edge_type: "oo".into(), endpoints: [*a, *b] })
            .collect();
        for (m, o) in &g.e_mo {
            edges.push(EdgeJson { edge_type: "mo".into(), endpoints: [OBJECT_NODES + m, *o] });
        }
        GraphJson { nodes, edges }
    }
}

impl GraphJson {
    pub fn into_hetero(self) -> Result<HeteroGraph> {
        let mut object_nodes = Vec::new();
        let mut manips: Vec<[f64; MANIP_ATTR_DIM]> = Vec::new();
        for n in &self.nodes {
            match n.node_type.as_str() {
                "object" => {
                    if n.attrs.len() != OBJ_ATTR_DIM {
                        return Err(DgformError::Contract("object node needs 3 attrs".into()));
                    }
                    object_nodes.push(ObjectNode { x: n.attrs[0], y: n.attrs[1], depth: n.attrs[2] });
                }
                "manipulator" => {
                    if n.attrs.len() != MANIP_ATTR_DIM {
                        return Err(DgformError::Contract("manipulator node needs 7 attrs".into()));
                    }
                    let mut pose = [0.0; MANIP_ATTR_DIM];
                    pose.copy_from_slice(&n.attrs);
                    manips.push(pose);
                }
                other => {
                    return Err(DgformError::Contract(format!("unknown node type {other:?}")));
                }
            }
        }
        if manips.len() != MANIP_NODES {
            return Err(DgformError::Contract(format!(
                "expected {MANIP_NODES} manipulator nodes, got {}",
                manips.len()
            )));
        }
        HeteroGraph::new(ObjectSubgraph::new(object_nodes)?, [manips[0], manips[1]])
    }
}
