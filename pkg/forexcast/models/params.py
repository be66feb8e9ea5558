"""Learnable parameter containers, their gradient twins and forward caches.

Gradients reuse the parameter classes: a gradient container is a parameter
container of identical shapes holding dL/dtheta instead of theta.
"""

from dataclasses import dataclass, fields
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from forexcast.errors import ShapeError
from forexcast.schemas.config import ModelSpec


def _check_shape(name: str, array: np.ndarray, expected: tuple):
    if array.shape != expected:
        raise ShapeError(name, expected, array.shape)


@dataclass(frozen=True)
class ParamGroup:
    """Named float64 tensors of one layer"""

    def tensors(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_tensors(cls, tensors: Mapping[str, np.ndarray]):
        return cls(**{f.name: np.array(tensors[f.name], dtype=np.float64) for f in fields(cls)})

    def map(self, fn: Callable[[np.ndarray], np.ndarray]):
        return type(self).from_tensors({k: fn(v) for k, v in self.tensors().items()})

    def zeros_like(self):
        return self.map(np.zeros_like)


@dataclass(frozen=True)
class LstmParams(ParamGroup):
    w_f: np.ndarray  # (H, H + d), acting on [h_{t-1}, x_t]
    w_i: np.ndarray
    w_c: np.ndarray
    w_o: np.ndarray
    b_f: np.ndarray  # (H,)
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    def __post_init__(self):
        if self.w_f.ndim != 2:
            raise ShapeError("w_f", "(H, H + d)", self.w_f.shape)
        h, width = self.w_f.shape
        if width <= h:
            raise ShapeError("w_f", f"({h}, {h} + d) with d >= 1", self.w_f.shape)
        for name in ("w_f", "w_i", "w_c", "w_o"):
            _check_shape(name, getattr(self, name), (h, width))
        for name in ("b_f", "b_i", "b_c", "b_o"):
            _check_shape(name, getattr(self, name), (h,))

    @property
    def hidden_size(self) -> int:
        return self.w_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_f.shape[1] - self.w_f.shape[0]

    def stacked(self):
        """Gate weights stacked as (4H, H + d) and biases as (4H,), order f, i, C, o"""
        w = np.concatenate([self.w_f, self.w_i, self.w_c, self.w_o], axis=0)
        b = np.concatenate([self.b_f, self.b_i, self.b_c, self.b_o])
        return w, b

    @classmethod
    def from_stacked(cls, w: np.ndarray, b: np.ndarray) -> "LstmParams":
        w_f, w_i, w_c, w_o = np.split(w, 4, axis=0)
        b_f, b_i, b_c, b_o = np.split(b, 4)
        return cls(w_f=w_f, w_i=w_i, w_c=w_c, w_o=w_o, b_f=b_f, b_i=b_i, b_c=b_c, b_o=b_o)


@dataclass(frozen=True)
class Conv1dParams(ParamGroup):
    weight: np.ndarray  # (F, d, K)
    bias: np.ndarray    # (F,)

    def __post_init__(self):
        if self.weight.ndim != 3:
            raise ShapeError("conv.weight", "(F, d, K)", self.weight.shape)
        _check_shape("conv.bias", self.bias, (self.weight.shape[0],))

    @property
    def num_filters(self) -> int:
        return self.weight.shape[0]

    @property
    def input_size(self) -> int:
        return self.weight.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weight.shape[2]


@dataclass(frozen=True)
class AttentionParams(ParamGroup):
    w_a: np.ndarray  # (M,)
    b_a: np.ndarray  # (1,)

    def __post_init__(self):
        if self.w_a.ndim != 1:
            raise ShapeError("attention.w_a", "(M,)", self.w_a.shape)
        _check_shape("attention.b_a", self.b_a, (1,))


@dataclass(frozen=True)
class DenseParams(ParamGroup):
    w_d: np.ndarray  # (M,)
    b_d: np.ndarray  # (1,)

    def __post_init__(self):
        if self.w_d.ndim != 1:
            raise ShapeError("dense.w_d", "(M,)", self.w_d.shape)
        _check_shape("dense.b_d", self.b_d, (1,))


@dataclass(frozen=True)
class LstmCache:
    inputs: np.ndarray    # (B, T, d)
    stacked: np.ndarray   # (B, T, H + d), [h_{t-1}, x_t]
    forget: np.ndarray    # (B, T, H)
    input_gate: np.ndarray
    candidate: np.ndarray
    output_gate: np.ndarray
    cell: np.ndarray
    cell_tanh: np.ndarray
    hidden: np.ndarray
    c0: np.ndarray        # (B, H)
    h0: np.ndarray
    batched: bool


@dataclass(frozen=True)
class Conv1dCache:
    padded: np.ndarray    # (B, T + K - 1, d)
    batched: bool


@dataclass(frozen=True)
class AttentionCache:
    z: np.ndarray         # (B, T, M)
    alpha: np.ndarray     # (B, T)
    batched: bool


class _ComponentSet:
    """Flat 'component.tensor' view shared by ModelParams and GradientSet"""

    COMPONENTS = ("lstm", "conv", "attention", "dense")

    def flat(self) -> Dict[str, np.ndarray]:
        out: Dict[str, np.ndarray] = {}
        for component in self.COMPONENTS:
            group = getattr(self, component)
            if group is None:
                continue
            for name, tensor in group.tensors().items():
                out[f"{component}.{name}"] = tensor
        return out

    @staticmethod
    def _groups_from_flat(flat: Mapping[str, np.ndarray]) -> Dict[str, Optional[ParamGroup]]:
        kinds = {"lstm": LstmParams, "conv": Conv1dParams, "attention": AttentionParams, "dense": DenseParams}
        grouped: Dict[str, Dict[str, np.ndarray]] = {}
        for key, tensor in flat.items():
            component, _, name = key.partition(".")
            if component not in kinds:
                raise ShapeError(key, "a known component tensor", "unknown")
            grouped.setdefault(component, {})[name] = tensor
        return {c: (kinds[c].from_tensors(grouped[c]) if c in grouped else None) for c in kinds}


@dataclass(frozen=True)
class GradientSet(_ComponentSet):
    """Gradients of a scalar loss, one container per present component"""
    lstm: Optional[LstmParams]
    conv: Optional[Conv1dParams]
    attention: AttentionParams
    dense: DenseParams

    @classmethod
    def from_flat(cls, flat: Mapping[str, np.ndarray]) -> "GradientSet":
        return cls(**cls._groups_from_flat(flat))


@dataclass(frozen=True)
class ModelParams(_ComponentSet):
    """All learnable tensors of one variant plus its spec"""
    spec: ModelSpec
    lstm: Optional[LstmParams]
    conv: Optional[Conv1dParams]
    attention: AttentionParams
    dense: DenseParams

    def __post_init__(self):
        spec = self.spec
        if spec.variant.uses_lstm != (self.lstm is not None):
            raise ShapeError("lstm", "present" if spec.variant.uses_lstm else "absent", "mismatch")
        if spec.variant.uses_conv != (self.conv is not None):
            raise ShapeError("conv", "present" if spec.variant.uses_conv else "absent", "mismatch")
        h, d, m = spec.hidden_size, spec.input_size, spec.context_size
        if self.lstm is not None:
            _check_shape("lstm.w_f", self.lstm.w_f, (h, h + d))
        if self.conv is not None:
            _check_shape("conv.weight", self.conv.weight, (spec.num_filters, d, spec.kernel_size))
        _check_shape("attention.w_a", self.attention.w_a, (m,))
        _check_shape("dense.w_d", self.dense.w_d, (m,))

    @classmethod
    def from_flat(cls, spec: ModelSpec, flat: Mapping[str, np.ndarray]) -> "ModelParams":
        return cls(spec=spec, **cls._groups_from_flat(flat))


@dataclass(frozen=True)
class ForwardTrace:
    lstm: Optional[LstmCache]
    conv: Optional[Conv1dCache]
    attention: AttentionCache
    context: np.ndarray      # (B, M)
    prediction: np.ndarray   # (B,)
    variant: str
    batched: bool
