//! The unified dynamic heterogeneous graph model: a two-layer heterogeneous
//! GCN encoder shared by a goal-conditioned policy head, an object-dynamics
//! transition head, and a value head, plus the model-based rollout loop that
//! alternates action sampling and object-state prediction.

use crate::config::ModelConfig;
use crate::error::{DgformError, Result};
use crate::graph::{
    HeteroGraph, ObjectSubgraph, MANIP_ATTR_DIM, MANIP_NODES, OBJECT_NODES, OBJ_ATTR_DIM,
};
use dgform_core::{Tape, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A dense layer: `y = x W + b`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
}

impl Linear {
    fn init(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Linear {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w: Vec<f64> = (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)).collect();
        Linear {
            w: Tensor::param(fan_in, fan_out, w).unwrap(),
            b: Tensor::param(1, fan_out, vec![0.0; fan_out]).unwrap(),
        }
    }

    pub fn forward(&self, tape: &mut Tape, x: &Tensor) -> Result<Tensor> {
        let h = tape.matmul(x, &self.w)?;
        Ok(tape.add_bias(&h, &self.b)?)
    }
}

/// One heterogeneous convolution layer: per-edge-type mean aggregation, one
/// weight matrix per (edge type, direction), summed per node type.
#[derive(Debug, Clone)]
pub struct HeteroLayer {
    /// Object self-connection.
    pub w_o_self: Tensor,
    /// Object <- object neighbors (E_oo).
    pub w_oo: Tensor,
    /// Object <- manipulator neighbors (E_mo).
    pub w_om: Tensor,
    pub b_o: Tensor,
    /// Manipulator self-connection.
    pub w_m_self: Tensor,
    /// Manipulator <- object neighbors (E_mo).
    pub w_mo: Tensor,
    pub b_m: Tensor,
}

impl HeteroLayer {
    fn init(rng: &mut ChaCha8Rng, obj_in: usize, manip_in: usize, out: usize) -> HeteroLayer {
        let mk = |rng: &mut ChaCha8Rng, fi: usize| {
            let limit = (6.0 / (fi + out) as f64).sqrt();
            let data: Vec<f64> = (0..fi * out).map(|_| rng.gen_range(-limit..limit)).collect();
            Tensor::param(fi, out, data).unwrap()
        };
        HeteroLayer {
            w_o_self: mk(rng, obj_in),
            w_oo: mk(rng, obj_in),
            w_om: mk(rng, manip_in),
            b_o: Tensor::param(1, out, vec![0.0; out]).unwrap(),
            w_m_self: mk(rng, manip_in),
            w_mo: mk(rng, obj_in),
            b_m: Tensor::param(1, out, vec![0.0; out]).unwrap(),
        }
    }
}

/// A homogeneous convolution layer over the object subgraph (goal encoder).
#[derive(Debug, Clone)]
pub struct GoalLayer {
    pub w_self: Tensor,
    pub w_adj: Tensor,
    pub b: Tensor,
}

impl GoalLayer {
    fn init(rng: &mut ChaCha8Rng, fan_in: usize, out: usize) -> GoalLayer {
        let mk = |rng: &mut ChaCha8Rng| {
            let limit = (6.0 / (fan_in + out) as f64).sqrt();
            let data: Vec<f64> = (0..fan_in * out).map(|_| rng.gen_range(-limit..limit)).collect();
            Tensor::param(fan_in, out, data).unwrap()
        };
        GoalLayer {
            w_self: mk(rng),
            w_adj: mk(rng),
            b: Tensor::param(1, out, vec![0.0; out]).unwrap(),
        }
    }
}

/// All trainable weights of the model.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub cfg: ModelConfig,
    pub gcn: [HeteroLayer; 2],
    pub goal: [GoalLayer; 2],
    pub policy: [Linear; 2],
    pub transition: [Linear; 2],
    pub value: [Linear; 2],
    pub log_std: Tensor,
}

impl ModelParams {
    pub fn init(cfg: &ModelConfig, rng: &mut ChaCha8Rng) -> ModelParams {
        let d = cfg.hidden_dim;
        let act = cfg.action_dim();
        ModelParams {
            cfg: cfg.clone(),
            gcn: [
                HeteroLayer::init(rng, OBJ_ATTR_DIM, MANIP_ATTR_DIM, d),
                HeteroLayer::init(rng, d, d, d),
            ],
            goal: [GoalLayer::init(rng, OBJ_ATTR_DIM, d), GoalLayer::init(rng, d, d)],
            policy: [Linear::init(rng, 4 * d, d), Linear::init(rng, d, act)],
            transition: [Linear::init(rng, 2 * d, d), Linear::init(rng, d, OBJ_ATTR_DIM)],
            value: [Linear::init(rng, d, d), Linear::init(rng, d, 1)],
            log_std: Tensor::param(1, act, vec![cfg.log_std_init; act]).unwrap(),
        }
    }

    /// Stable-ordered (name, tensor) pairs for the optimizer and checkpoints.
    pub fn named_params(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        for (i, l) in self.gcn.iter().enumerate() {
            out.push((format!("gcn{i}.w_o_self"), l.w_o_self.clone()));
            out.push((format!("gcn{i}.w_oo"), l.w_oo.clone()));
            out.push((format!("gcn{i}.w_om"), l.w_om.clone()));
            out.push((format!("gcn{i}.b_o"), l.b_o.clone()));
            out.push((format!("gcn{i}.w_m_self"), l.w_m_self.clone()));
            out.push((format!("gcn{i}.w_mo"), l.w_mo.clone()));
            out.push((format!("gcn{i}.b_m"), l.b_m.clone()));
        }
        for (i, l) in self.goal.iter().enumerate() {
            out.push((format!("goal{i}.w_self"), l.w_self.clone()));
            out.push((format!("goal{i}.w_adj"), l.w_adj.clone()));
            out.push((format!("goal{i}.b"), l.b.clone()));
        }
        for (name, mlp) in [
            ("policy", &self.policy),
            ("transition", &self.transition),
            ("value", &self.value),
        ] {
            for (i, l) in mlp.iter().enumerate() {
                out.push((format!("{name}{i}.w"), l.w.clone()));
                out.push((format!("{name}{i}.b"), l.b.clone()));
            }
        }
        out.push(("log_std".into(), self.log_std.clone()));
        out
    }

    pub fn params(&self) -> Vec<Tensor> {
        self.named_params().into_iter().map(|(_, t)| t).collect()
    }

    /// Independent copy with fresh storage.
    pub fn deep_clone(&self) -> ModelParams {
        let clone_layer = |l: &HeteroLayer| HeteroLayer {
            w_o_self: l.w_o_self.deep_clone(),
            w_oo: l.w_oo.deep_clone(),
            w_om: l.w_om.deep_clone(),
            b_o: l.b_o.deep_clone(),
            w_m_self: l.w_m_self.deep_clone(),
            w_mo: l.w_mo.deep_clone(),
            b_m: l.b_m.deep_clone(),
        };
        let clone_goal = |l: &GoalLayer| GoalLayer {
            w_self: l.w_self.deep_clone(),
            w_adj: l.w_adj.deep_clone(),
            b: l.b.deep_clone(),
        };
        let clone_lin =
            |l: &Linear| Linear { w: l.w.deep_clone(), b: l.b.deep_clone() };
        ModelParams {
            cfg: self.cfg.clone(),
            gcn: [clone_layer(&self.gcn[0]), clone_layer(&self.gcn[1])],
            goal: [clone_goal(&self.goal[0]), clone_goal(&self.goal[1])],
            policy: [clone_lin(&self.policy[0]), clone_lin(&self.policy[1])],
            transition: [clone_lin(&self.transition[0]), clone_lin(&self.transition[1])],
            value: [clone_lin(&self.value[0]), clone_lin(&self.value[1])],
            log_std: self.log_std.deep_clone(),
        }
    }

    /// Clamped standard deviations from the learned log-std vector.
    pub fn stds(&self) -> Vec<f64> {
        self.log_std
            .to_vec()
            .iter()
            .map(|ls| ls.clamp(self.cfg.log_std_min, self.cfg.log_std_max).exp())
            .collect()
    }

    /// Clamped log-std as a tape tensor.
    pub fn log_std_clamped(&self, tape: &mut Tape) -> Result<Tensor> {
        Ok(tape.clamp(&self.log_std, self.cfg.log_std_min, self.cfg.log_std_max)?)
    }
}

/// Per-node-type hidden features after the two GCN layers.
#[derive(Debug, Clone)]
pub struct Hidden {
    /// `[2, hidden_dim]`.
    pub h_m: Tensor,
    /// `[9, hidden_dim]`.
    pub h_o: Tensor,
}

/// Diagonal Gaussian over the 2x7-dim dual end-effector action.
#[derive(Debug, Clone)]
pub struct ActionDistribution {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

// Mean-aggregation matrices for the fixed 9+2 topology.

/// Object <- object: row 0 averages the 8 boundary nodes (star edges); each
/// boundary row averages the center and its two ring neighbors.
fn m_oo() -> Tensor {
    let n = OBJECT_NODES;
    let mut m = vec![0.0; n * n];
    for b in 1..n {
        m[b] = 1.0 / 8.0;
    }
    for b in 1..n {
        let prev = if b == 1 { 8 } else { b - 1 };
        let next = if b == 8 { 1 } else { b + 1 };
        m[b * n] = 1.0 / 3.0;
        m[b * n + prev] = 1.0 / 3.0;
        m[b * n + next] = 1.0 / 3.0;
    }
    Tensor::from_vec(n, n, m).unwrap()
}

/// Object <- manipulator: full bipartite, mean over the 2 manipulators.
fn m_om() -> Tensor {
    Tensor::from_vec(OBJECT_NODES, MANIP_NODES, vec![0.5; OBJECT_NODES * MANIP_NODES]).unwrap()
}

/// Manipulator <- object: full bipartite, mean over the 9 object nodes.
fn m_mo() -> Tensor {
    Tensor::from_vec(
        MANIP_NODES,
        OBJECT_NODES,
        vec![1.0 / OBJECT_NODES as f64; MANIP_NODES * OBJECT_NODES],
    )
    .unwrap()
}

fn check_finite(name: &str, t: &Tensor) -> Result<()> {
    if !t.is_finite() {
        return Err(DgformError::Contract(format!("non-finite {name} attributes")));
    }
    Ok(())
}

/// Two rounds of per-edge-type message passing with mean aggregation and a
/// ReLU nonlinearity; returns hidden features for both node types.
pub fn hetero_gcn_forward(tape: &mut Tape, params: &ModelParams, g: &HeteroGraph) -> Result<Hidden> {
    let x_o = Tensor::from_vec(OBJECT_NODES, OBJ_ATTR_DIM, g.object.attr_matrix())?;
    let x_m = Tensor::from_vec(MANIP_NODES, MANIP_ATTR_DIM, g.manip_attr_matrix())?;
    check_finite("object", &x_o)?;
    check_finite("manipulator", &x_m)?;
    let (agg_oo, agg_om, agg_mo) = (m_oo(), m_om(), m_mo());
    let mut h_o = x_o;
    let mut h_m = x_m;
    for layer in &params.gcn {
        let oo = tape.matmul(&agg_oo, &h_o)?;
        let om = tape.matmul(&agg_om, &h_m)?;
        let self_o = tape.matmul(&h_o, &layer.w_o_self)?;
        let from_oo = tape.matmul(&oo, &layer.w_oo)?;
        let from_om = tape.matmul(&om, &layer.w_om)?;
        let sum_o = tape.add(&self_o, &from_oo)?;
        let sum_o = tape.add(&sum_o, &from_om)?;
        let sum_o = tape.add_bias(&sum_o, &layer.b_o)?;
        let next_o = tape.relu(&sum_o)?;

        let mo = tape.matmul(&agg_mo, &h_o)?;
        let self_m = tape.matmul(&h_m, &layer.w_m_self)?;
        let from_mo = tape.matmul(&mo, &layer.w_mo)?;
        let sum_m = tape.add(&self_m, &from_mo)?;
        let sum_m = tape.add_bias(&sum_m, &layer.b_m)?;
        let next_m = tape.relu(&sum_m)?;

        h_o = next_o;
        h_m = next_m;
    }
    Ok(Hidden { h_m, h_o })
}

/// Object-branch GCN over the goal subgraph, mean-pooled to `[1, hidden_dim]`.
pub fn encode_goal(tape: &mut Tape, params: &ModelParams, goal: &ObjectSubgraph) -> Result<Tensor> {
    let mut h = Tensor::from_vec(OBJECT_NODES, OBJ_ATTR_DIM, goal.attr_matrix())?;
    check_finite("goal", &h)?;
    let agg = m_oo();
    for layer in &params.goal {
        let nb = tape.matmul(&agg, &h)?;
        let s = tape.matmul(&h, &layer.w_self)?;
        let a = tape.matmul(&nb, &layer.w_adj)?;
        let sum = tape.add(&s, &a)?;
        let sum = tape.add_bias(&sum, &layer.b)?;
        h = tape.relu(&sum)?;
    }
    Ok(tape.mean_rows(&h)?)
}

/// Policy mean: MLP over (flattened manipulator hidden, pooled object hidden,
/// goal embedding). Returns `[1, action_dim]`.
pub fn policy_mean(
    tape: &mut Tape,
    params: &ModelParams,
    hidden: &Hidden,
    goal_emb: &Tensor,
) -> Result<Tensor> {
    let d = params.cfg.hidden_dim;
    let flat_m = tape.reshape(&hidden.h_m, 1, MANIP_NODES * d)?;
    let pooled_o = tape.mean_rows(&hidden.h_o)?;
    let input = tape.concat_cols(&[flat_m, pooled_o, goal_emb.clone()])?;
    let h = params.policy[0].forward(tape, &input)?;
    let h = tape.relu(&h)?;
    params.policy[1].forward(tape, &h)
}

/// Policy head: diagonal Gaussian with the learned (clamped) log-std.
pub fn policy_head(
    tape: &mut Tape,
    params: &ModelParams,
    hidden: &Hidden,
    goal_emb: &Tensor,
) -> Result<ActionDistribution> {
    let mean = policy_mean(tape, params, hidden, goal_emb)?;
    Ok(ActionDistribution { mean: mean.to_vec(), std: params.stds() })
}

/// Transition head: per-object-node MLP over (node hidden, pooled manipulator
/// hidden), predicting the next object node attributes `[9, 3]`.
pub fn transition_head(tape: &mut Tape, params: &ModelParams, hidden: &Hidden) -> Result<Tensor> {
    let d = params.cfg.hidden_dim;
    let pooled_m = tape.mean_rows(&hidden.h_m)?;
    let ones = Tensor::from_vec(OBJECT_NODES, 1, vec![1.0; OBJECT_NODES])?;
    let tiled = tape.matmul(&ones, &pooled_m)?;
    debug_assert_eq!(tiled.shape(), [OBJECT_NODES, d]);
    let input = tape.concat_cols(&[hidden.h_o.clone(), tiled])?;
    let h = params.transition[0].forward(tape, &input)?;
    let h = tape.relu(&h)?;
    params.transition[1].forward(tape, &h)
}

/// Value head: scalar from the mean over all 11 node hidden features.
pub fn value_head(tape: &mut Tape, params: &ModelParams, hidden: &Hidden) -> Result<Tensor> {
    let total = (OBJECT_NODES + MANIP_NODES) as f64;
    let ones_o = Tensor::from_vec(1, OBJECT_NODES, vec![1.0; OBJECT_NODES])?;
    let ones_m = Tensor::from_vec(1, MANIP_NODES, vec![1.0; MANIP_NODES])?;
    let sum_o = tape.matmul(&ones_o, &hidden.h_o)?;
    let sum_m = tape.matmul(&ones_m, &hidden.h_m)?;
    let sum = tape.add(&sum_o, &sum_m)?;
    let pooled = tape.scale(&sum, 1.0 / total)?;
    let h = params.value[0].forward(tape, &pooled)?;
    let h = tape.relu(&h)?;
    params.value[1].forward(tape, &h)
}

/// Exact log-density of a diagonal Gaussian sample.
pub fn logprob_f64(dist: &ActionDistribution, action: &[f64]) -> f64 {
    let mut lp = 0.0;
    for ((a, m), s) in action.iter().zip(dist.mean.iter()).zip(dist.std.iter()) {
        let z = (a - m) / s;
        lp += -0.5 * z * z - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    lp
}

/// Entropy of the diagonal Gaussian.
pub fn entropy_f64(std: &[f64]) -> f64 {
    std.iter()
        .map(|s| 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * s * s).ln())
        .sum()
}

/// Draw a sample and its exact log density.
pub fn sample_action(dist: &ActionDistribution, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let action: Vec<f64> = dist
        .mean
        .iter()
        .zip(dist.std.iter())
        .map(|(m, s)| m + s * standard_normal(rng))
        .collect();
    let lp = logprob_f64(dist, &action);
    (action, lp)
}

/// Box-Muller standard normal; two uniforms per draw keeps the stream
/// deterministic and portable.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Log-density of a constant action under the policy, on the tape: the mean
/// comes from `policy_mean`, the scale from the clamped log-std parameter.
pub fn logprob_tape(
    tape: &mut Tape,
    params: &ModelParams,
    mean: &Tensor,
    action: &[f64],
) -> Result<Tensor> {
    let act = Tensor::row(action.to_vec());
    let ls = params.log_std_clamped(tape)?;
    let diff = tape.sub(&act, mean)?;
    let sq = tape.mul(&diff, &diff)?;
    // exp(-2 ls) = 1 / sigma^2
    let neg2ls = tape.scale(&ls, -2.0)?;
    let inv_var = tape.exp(&neg2ls)?;
    let weighted = tape.mul(&sq, &inv_var)?;
    let quad = tape.sum(&weighted)?;
    let quad = tape.scale(&quad, -0.5)?;
    let ls_sum = tape.sum(&ls)?;
    let neg_ls = tape.scale(&ls_sum, -1.0)?;
    let lp = tape.add(&quad, &neg_ls)?;
    let d = action.len() as f64;
    Ok(tape.add_scalar(&lp, -0.5 * d * (2.0 * std::f64::consts::PI).ln())?)
}

/// Policy entropy on the tape: `sum(log_std) + d/2 * ln(2 pi e)`.
pub fn entropy_tape(tape: &mut Tape, params: &ModelParams) -> Result<Tensor> {
    let ls = params.log_std_clamped(tape)?;
    let s = tape.sum(&ls)?;
    let d = params.cfg.action_dim() as f64;
    Ok(tape.add_scalar(&s, 0.5 * d * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln())?)
}

/// Split a 14-dim action into the two 7-dim end-effector poses.
pub fn action_to_poses(action: &[f64]) -> [[f64; MANIP_ATTR_DIM]; MANIP_NODES] {
    let mut out = [[0.0; MANIP_ATTR_DIM]; MANIP_NODES];
    out[0].copy_from_slice(&action[0..MANIP_ATTR_DIM]);
    out[1].copy_from_slice(&action[MANIP_ATTR_DIM..2 * MANIP_ATTR_DIM]);
    out
}

/// Re-project the quaternion blocks (components 3..7 of each pose) onto the
/// unit sphere; degenerate quaternions become the identity rotation.
pub fn project_quaternions(action: &mut [f64]) {
    for base in [3usize, 10] {
        let q = &mut action[base..base + 4];
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if n < 1e-12 {
            q.copy_from_slice(&[1.0, 0.0, 0.0, 0.0]);
        } else {
            q.iter_mut().for_each(|v| *v /= n);
        }
    }
}

/// Next-object-state predictor used inside `model_rollout`. The learned head
/// reads only the time-t graph (the action argument is ignored); test oracles
/// may substitute the true environment, which consumes the action.
pub trait TransitionFn {
    fn predict_next(
        &mut self,
        params: &ModelParams,
        g: &HeteroGraph,
        action: &[f64],
    ) -> Result<ObjectSubgraph>;
}

/// Eq.-style learned dynamics: transition head on a throwaway tape.
pub struct LearnedTransition;

impl TransitionFn for LearnedTransition {
    fn predict_next(
        &mut self,
        params: &ModelParams,
        g: &HeteroGraph,
        _action: &[f64],
    ) -> Result<ObjectSubgraph> {
        let mut tape = Tape::new();
        let hidden = hetero_gcn_forward(&mut tape, params, g)?;
        let pred = transition_head(&mut tape, params, &hidden)?;
        ObjectSubgraph::from_attr_matrix(&pred.to_vec())
    }
}

/// How actions are chosen during a rollout.
pub enum RolloutMode<'a> {
    Stochastic(&'a mut ChaCha8Rng),
    /// Use the distribution mean (std collapsed).
    Deterministic,
}

/// One model-based rollout record.
#[derive(Debug, Clone)]
pub struct RolloutTrace {
    /// Graphs the policy acted on: the real start graph, then predicted ones.
    pub graphs: Vec<HeteroGraph>,
    pub actions: Vec<Vec<f64>>,
    pub pred_subgraphs: Vec<ObjectSubgraph>,
    pub logprobs: Vec<f64>,
    pub values: Vec<f64>,
    /// Value of the graph reached after the last step.
    pub last_value: f64,
    /// Set when a non-finite prediction truncated the rollout early.
    pub truncated: bool,
}

/// Closed-loop-in-imagination rollout: encode the current (real or predicted)
/// graph, sample an action, predict the next object subgraph, rebuild the
/// graph with the predicted object attributes and the manipulator poses
/// implied by the action, repeat for `horizon` steps.
pub fn model_rollout(
    params: &ModelParams,
    g0: &HeteroGraph,
    goal: &ObjectSubgraph,
    horizon: usize,
    mut mode: RolloutMode,
    dynamics: &mut dyn TransitionFn,
) -> Result<RolloutTrace> {
    if horizon == 0 {
        return Err(DgformError::Contract("rollout horizon must be >= 1".into()));
    }
    let mut trace = RolloutTrace {
        graphs: Vec::with_capacity(horizon),
        actions: Vec::with_capacity(horizon),
        pred_subgraphs: Vec::with_capacity(horizon),
        logprobs: Vec::with_capacity(horizon),
        values: Vec::with_capacity(horizon),
        last_value: 0.0,
        truncated: false,
    };
    let mut g = g0.clone();
    for _ in 0..horizon {
        let mut tape = Tape::new();
        let hidden = hetero_gcn_forward(&mut tape, params, &g)?;
        let goal_emb = encode_goal(&mut tape, params, goal)?;
        let dist = policy_head(&mut tape, params, &hidden, &goal_emb)?;
        let value = value_head(&mut tape, params, &hidden)?.item()?;
        let mut action = match mode {
            RolloutMode::Stochastic(ref mut rng) => {
                let (a, _) = sample_action(&dist, rng);
                a
            }
            RolloutMode::Deterministic => dist.mean.clone(),
        };
        project_quaternions(&mut action);
        let logprob = logprob_f64(&dist, &action);
        let pred = dynamics.predict_next(params, &g, &action)?;
        let finite = pred
            .nodes
            .iter()
            .all(|n| n.x.is_finite() && n.y.is_finite() && n.depth.is_finite());
        trace.graphs.push(g.clone());
        trace.actions.push(action.clone());
        trace.logprobs.push(logprob);
        trace.values.push(value);
        if !finite {
            trace.truncated = true;
            trace.pred_subgraphs.push(g.object.clone());
            break;
        }
        trace.pred_subgraphs.push(pred.clone());
        g = HeteroGraph::new(pred, action_to_poses(&action))?;
    }
    if !trace.truncated {
        let mut tape = Tape::new();
        let hidden = hetero_gcn_forward(&mut tape, params, &g)?;
        trace.last_value = value_head(&mut tape, params, &hidden)?.item()?;
    }
    Ok(trace)
}
