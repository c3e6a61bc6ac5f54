"""Graph attention encoder, feed-forward heads, losses, Adam, dropout.

The attention convention: for node i with neighborhood N_i (self loop
included), each neighbor k gets a score e_ik = ReLU(a . [W h_i ; W h_k])
which is softmax-normalized over N_i; the layer output is
h_i = ReLU(sum_k alpha_ik W h_k). The nonlinearity inside the score is
ReLU by design, not the customary LeakyReLU.

Graphs are compiled to flat edge arrays (sorted by destination, self
loops added) so a whole page, or several disjoint pages merged into one
batch graph, runs as a handful of numpy kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .layout_graph import LayoutGraph
from .tensor import Tensor, concat, gather_rows, segment_sum
from .tensor import softmax_cross_entropy as _softmax_cross_entropy_primitive

DROPOUT_RATE = 0.25
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
PROB_EPS = 1e-7


# -- graph compilation ------------------------------------------------------


@dataclass(frozen=True)
class CompiledGraph:
    """Edge arrays for one (possibly merged) graph, sorted by dst.

    Node order follows the LayoutGraph node_ids; a self loop per node is
    always present, so every destination segment is nonempty.
    """

    num_nodes: int
    src: np.ndarray
    dst: np.ndarray


def compile_graph(graph: LayoutGraph) -> CompiledGraph:
    index = {fid: k for k, fid in enumerate(graph.node_ids)}
    n = len(graph.node_ids)
    src = [np.arange(n)]
    dst = [np.arange(n)]
    pairs = {(index[u], index[v]) for u, v, _ in graph.edges}
    if pairs:
        arr = np.asarray(sorted(pairs), dtype=np.intp)
        src.append(arr[:, 0])
        dst.append(arr[:, 1])
        src.append(arr[:, 1])
        dst.append(arr[:, 0])
    src_all = np.concatenate(src)
    dst_all = np.concatenate(dst)
    order = np.lexsort((src_all, dst_all))
    return CompiledGraph(num_nodes=n, src=src_all[order], dst=dst_all[order])


def merge_graphs(graphs: list[CompiledGraph]) -> CompiledGraph:
    """Disjoint union with node offsets; edges stay sorted by dst."""
    srcs, dsts, offset = [], [], 0
    for g in graphs:
        srcs.append(g.src + offset)
        dsts.append(g.dst + offset)
        offset += g.num_nodes
    return CompiledGraph(
        num_nodes=offset, src=np.concatenate(srcs), dst=np.concatenate(dsts)
    )


# -- parameter initialization -------------------------------------------------


def xavier_uniform(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out))."""
    if len(shape) == 2:
        fan_out, fan_in = shape
    else:
        fan_in, fan_out = shape[0], 1
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


# -- GAT ---------------------------------------------------------------------


class GATLayer:
    """One attention layer; W is (out_dim, in_dim), a has length 2*out_dim."""

    def __init__(self, w: np.ndarray, a: np.ndarray, trainable: bool = True):
        if a.shape != (2 * w.shape[0],):
            raise ShapeError(f"attention vector length {a.shape} does not match W {w.shape}")
        self.w = Tensor(w, requires_grad=trainable)
        self.a = Tensor(a, requires_grad=trainable)

    @classmethod
    def init(cls, rng: np.random.Generator, in_dim: int, out_dim: int) -> "GATLayer":
        return cls(xavier_uniform(rng, (out_dim, in_dim)), xavier_uniform(rng, (2 * out_dim,)))

    @property
    def out_dim(self) -> int:
        return self.w.data.shape[0]

    def forward(self, h: Tensor | np.ndarray, graph: CompiledGraph) -> Tensor:
        h = Tensor._lift(h)
        if h.data.shape[0] != graph.num_nodes:
            raise ShapeError("node count does not match graph")
        wh = h @ Tensor._node(self.w.data.T, (self.w,), lambda g: self.w._accumulate(g.T))
        out_dim = self.out_dim
        a_dst = Tensor._node(
            self.a.data[:out_dim], (self.a,),
            lambda g: self.a._accumulate(np.concatenate([g, np.zeros(out_dim)])),
        )
        a_src = Tensor._node(
            self.a.data[out_dim:], (self.a,),
            lambda g: self.a._accumulate(np.concatenate([np.zeros(out_dim), g])),
        )
        score_dst = wh @ a_dst
        score_src = wh @ a_src
        scores = (gather_rows(score_dst, graph.dst) + gather_rows(score_src, graph.src)).relu()
        # shift-invariant softmax: per-destination max as a detached constant
        starts = np.searchsorted(graph.dst, np.arange(graph.num_nodes))
        seg_max = np.maximum.reduceat(scores.data, starts)
        z = (scores - seg_max[graph.dst]).exp()
        denom = segment_sum(z, graph.dst, graph.num_nodes)
        alpha = z / gather_rows(denom, graph.dst)
        messages = gather_rows(wh, graph.src) * alpha.reshape((-1, 1))
        return segment_sum(messages, graph.dst, graph.num_nodes).relu()

    def attention(self, h: np.ndarray, graph: CompiledGraph) -> np.ndarray:
        """Per-edge attention weights, aligned with graph.src/dst (no grad)."""
        wh = np.asarray(h) @ self.w.data.T
        out_dim = self.out_dim
        scores = wh[graph.dst] @ self.a.data[:out_dim] + wh[graph.src] @ self.a.data[out_dim:]
        scores = np.maximum(scores, 0.0)
        starts = np.searchsorted(graph.dst, np.arange(graph.num_nodes))
        z = np.exp(scores - np.maximum.reduceat(scores, starts)[graph.dst])
        denom = np.add.reduceat(z, starts)
        return z / denom[graph.dst]

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.w": self.w, f"{prefix}.a": self.a}

    def set_trainable(self, trainable: bool) -> None:
        self.w.requires_grad = trainable
        self.a.requires_grad = trainable


class GATEncoder:
    """Stack of GAT layers with dropout between layers while training."""

    def __init__(self, layers: list[GATLayer], dropout_rate: float = DROPOUT_RATE):
        self.layers = layers
        self.dropout_rate = dropout_rate
        self.frozen = False

    @classmethod
    def init(
        cls,
        rng: np.random.Generator,
        in_dim: int,
        hidden_dim: int,
        num_layers: int = 2,
        dropout_rate: float = DROPOUT_RATE,
    ) -> "GATEncoder":
        layers, d = [], in_dim
        for _ in range(num_layers):
            layers.append(GATLayer.init(rng, d, hidden_dim))
            d = hidden_dim
        return cls(layers, dropout_rate)

    def forward(
        self,
        h0: Tensor | np.ndarray,
        graph: CompiledGraph,
        rng: np.random.Generator | None = None,
        training: bool = False,
    ) -> Tensor:
        h = Tensor._lift(h0)
        for i, layer in enumerate(self.layers):
            if i > 0:
                h = dropout(h, self.dropout_rate, rng, training)
            h = layer.forward(h, graph)
        return h

    def encode(self, h0: np.ndarray, graph: CompiledGraph) -> np.ndarray:
        """Inference-mode embedding as a plain array (no dropout, no graph)."""
        was = [(l.w.requires_grad, l.a.requires_grad) for l in self.layers]
        for layer in self.layers:
            layer.set_trainable(False)
        try:
            return self.forward(h0, graph, rng=None, training=False).data
        finally:
            for layer, (w_req, a_req) in zip(self.layers, was):
                layer.w.requires_grad = w_req
                layer.a.requires_grad = a_req

    def freeze(self) -> None:
        self.frozen = True
        for layer in self.layers:
            layer.set_trainable(False)

    def params(self, prefix: str = "gat") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for i, layer in enumerate(self.layers):
            out.update(layer.params(f"{prefix}.{i}"))
        return out


# -- feed-forward -------------------------------------------------------------


class FeedForward:
    """One hidden ReLU layer plus a linear output layer."""

    def __init__(self, w1, b1, w2, b2, dropout_rate: float = DROPOUT_RATE):
        self.w1 = Tensor(w1, requires_grad=True)
        self.b1 = Tensor(b1, requires_grad=True)
        self.w2 = Tensor(w2, requires_grad=True)
        self.b2 = Tensor(b2, requires_grad=True)
        self.dropout_rate = dropout_rate

    @classmethod
    def init(
        cls,
        rng: np.random.Generator,
        in_dim: int,
        hidden_dim: int,
        out_dim: int,
        dropout_rate: float = DROPOUT_RATE,
    ) -> "FeedForward":
        return cls(
            xavier_uniform(rng, (hidden_dim, in_dim)),
            np.zeros(hidden_dim),
            xavier_uniform(rng, (out_dim, hidden_dim)),
            np.zeros(out_dim),
            dropout_rate,
        )

    def forward(
        self,
        x: Tensor | np.ndarray,
        rng: np.random.Generator | None = None,
        training: bool = False,
    ) -> Tensor:
        x = dropout(Tensor._lift(x), self.dropout_rate, rng, training)
        w1t = Tensor._node(self.w1.data.T, (self.w1,), lambda g: self.w1._accumulate(g.T))
        w2t = Tensor._node(self.w2.data.T, (self.w2,), lambda g: self.w2._accumulate(g.T))
        hidden = ((x @ w1t) + self.b1).relu()
        return (hidden @ w2t) + self.b2

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {
            f"{prefix}.w1": self.w1,
            f"{prefix}.b1": self.b1,
            f"{prefix}.w2": self.w2,
            f"{prefix}.b2": self.b2,
        }


# -- losses, dropout ----------------------------------------------------------


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray) -> tuple[Tensor, np.ndarray]:
    """Mean cross-entropy over rows plus detached probabilities."""
    return _softmax_cross_entropy_primitive(logits, labels)


def binary_cross_entropy(p: Tensor, targets: np.ndarray) -> Tensor:
    """Mean -[y ln p + (1-y) ln(1-p)] with p clamped away from {0, 1}."""
    p = Tensor._lift(p).clip(PROB_EPS, 1.0 - PROB_EPS)
    y = np.asarray(targets, dtype=np.float64)
    losses = -(y * p.log() + (1.0 - y) * (1.0 - p).log())
    return losses.mean()


def dropout(
    x: Tensor,
    rate: float,
    rng: np.random.Generator | None,
    training: bool,
) -> Tensor:
    """Inverted dropout; identity when not training or rate is 0."""
    if not training or rate == 0.0:
        return x
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rng is None:
        raise ValueError("training-mode dropout needs an rng")
    mask = (rng.random(x.data.shape) >= rate) / (1.0 - rate)
    return x * mask


# -- optimizer ----------------------------------------------------------------


@dataclass
class Adam:
    """Standard Adam with bias correction; state keyed by parameter name."""

    lr: float = 1e-3
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def step(self, params: dict[str, Tensor]) -> None:
        self.t += 1
        for name in sorted(params):
            p = params[name]
            if not p.requires_grad:
                continue
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            m = self.m.setdefault(name, np.zeros_like(p.data))
            v = self.v.setdefault(name, np.zeros_like(p.data))
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            m_hat = m / (1.0 - self.beta1**self.t)
            v_hat = v / (1.0 - self.beta2**self.t)
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def zero_grads(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.grad = None


# -- gradient verification ------------------------------------------------------


def finite_difference_check(
    loss_fn,
    params: dict[str, Tensor],
    step: float = 1e-5,
    max_entries_per_param: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Largest relative error between backprop and central differences.

    loss_fn rebuilds the forward graph and returns a scalar Tensor. The
    relative error per entry is |fd - bp| / max(|fd|, |bp|, 1).
    """
    zero_grads(params)
    loss_fn().backward()
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
        if p.requires_grad
    }
    worst = 0.0
    for name in sorted(analytic):
        p = params[name]
        flat = p.data.reshape(-1)
        indices = range(flat.size)
        if max_entries_per_param is not None and flat.size > max_entries_per_param:
            picker = rng if rng is not None else np.random.default_rng(0)
            indices = picker.choice(flat.size, size=max_entries_per_param, replace=False)
        for idx in indices:
            original = flat[idx]
            flat[idx] = original + step
            up = loss_fn().item()
            flat[idx] = original - step
            down = loss_fn().item()
            flat[idx] = original
            fd = (up - down) / (2.0 * step)
            bp = analytic[name].reshape(-1)[idx]
            err = abs(fd - bp) / max(abs(fd), abs(bp), 1.0)
            worst = max(worst, err)
    return worst
