"""Qubit pre/postselection, weak values and the postselection kernel.

For an observable with ``A @ A == 1`` the weak coupling ``exp(-i k A)``
equals ``cos k - i A sin k``, so projecting on the postselected state
multiplies the probe by

    B(k) = <f|i> (cos k - i A_w sin k),   A_w = <f|A|i> / <f|i>.

The overlap prefactor cancels in every normalized quantity and is off by
default.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, KernelZero, OrthogonalSelection, PostselectionAnnihilated
from .grid import ZERO_NORM, ProbeWaveFunction, expectation_x, normalize

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class QubitState:
    amp0: complex
    amp1: complex

    def __post_init__(self):
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise BadParams(f"qubit state not normalized: |a0|^2+|a1|^2 = {norm!r}")

    @classmethod
    def from_amplitudes(cls, amp0, amp1):
        """Normalize ``(amp0, amp1)`` and build the state."""
        n = np.sqrt(abs(amp0) ** 2 + abs(amp1) ** 2)
        if n == 0:
            raise BadParams("zero vector is not a state")
        return cls(complex(amp0) / n, complex(amp1) / n)

    @property
    def vector(self):
        return np.array([self.amp0, self.amp1], dtype=complex)


@dataclass(frozen=True)
class InvolutiveObservable:
    """Hermitian ``n . sigma`` with a unit Bloch vector, hence squaring to 1."""

    bloch: tuple

    def __post_init__(self):
        b = tuple(float(c) for c in self.bloch)
        if len(b) != 3 or abs(np.linalg.norm(b) - 1.0) > 1e-12:
            raise BadParams(f"bloch vector must be a unit 3-vector, got {self.bloch}")
        object.__setattr__(self, "bloch", b)

    @property
    def matrix(self):
        return sum(c * p for c, p in zip(self.bloch, PAULI))


def overlap(i, f):
    """<f|i>."""
    return complex(np.vdot(f.vector, i.vector))


def weak_value(i, f, observable):
    ov = overlap(i, f)
    if abs(ov) <= 1e-12:
        raise OrthogonalSelection(f"|<f|i>| = {abs(ov):.3e}; weak value undefined")
    return complex(np.vdot(f.vector, observable.matrix @ i.vector)) / ov


@dataclass(frozen=True)
class PostselectionKernel:
    weak_value: complex
    include_overlap: bool = False
    overlap: complex = 1.0

    @classmethod
    def from_states(cls, i, f, observable, include_overlap=False):
        return cls(weak_value(i, f, observable), include_overlap, overlap(i, f))

    @property
    def prefactor(self):
        return self.overlap if self.include_overlap else 1.0

    def root(self, k_min=-0.5 * np.pi, k_max=0.5 * np.pi):
        """Zero of ``B`` in ``[k_min, k_max]``, or ``None``.

        ``cos k - i A sin k = 0`` has a real solution only for purely
        imaginary ``A = i b``, at ``tan k = -1/b``.
        """
        a, b = self.weak_value.real, self.weak_value.imag
        if abs(a) > 1e-14:
            return None
        candidates = [np.pi / 2, -np.pi / 2] if b == 0 else [np.arctan(-1.0 / b)]
        candidates = [c + s * np.pi for c in candidates for s in (-1, 0, 1)]
        inside = [c for c in candidates if k_min - 1e-12 <= c <= k_max + 1e-12]
        return min(inside, key=abs) if inside else None


def kernel_eval(kernel, k):
    k = np.asarray(k, dtype=float)
    return kernel.prefactor * (np.cos(k) - 1j * kernel.weak_value * np.sin(k))


def kernel_bounds(kernel, grid):
    """(min, max) of |B|^2 over the grid nodes."""
    b2 = np.abs(kernel_eval(kernel, grid.k)) ** 2
    return float(b2.min()), float(b2.max())


def check_kernel(kernel, grid, tol=1e-9):
    """Raise :class:`KernelZero` if B vanishes on the grid's domain."""
    root = kernel.root(grid.k_min, grid.k_max)
    if root is not None:
        raise KernelZero(root)
    babs = np.abs(kernel_eval(kernel, grid.k))
    j = int(np.argmin(babs))
    if babs[j] <= tol * max(1.0, abs(kernel.prefactor)):
        raise KernelZero(grid.k[j])


def apply_kernel(xi, kernel):
    """Return ``(B * xi, N_f)`` with ``N_f`` the squared norm of ``B * xi``."""
    raw = ProbeWaveFunction(xi.grid, kernel_eval(kernel, xi.grid.k) * xi.values)
    n_f = raw.norm_sq
    if n_f <= ZERO_NORM:
        raise PostselectionAnnihilated("postselected probe has zero norm")
    return raw, n_f


def final_probe(xi, kernel):
    """Normalized postselected probe."""
    raw, _ = apply_kernel(xi, kernel)
    return normalize(raw)


def shift(xi, kernel):
    """Pointer shift ``<x>_f - <x>_i``; invariant under gauge translations of xi."""
    return expectation_x(final_probe(xi, kernel)) - expectation_x(xi)


def postselection_probability(xi, kernel):
    """Success probability ``|<f|i>|^2 N_f / N_i`` (needs the overlap)."""
    k = PostselectionKernel(kernel.weak_value, True, kernel.overlap)
    _, n_f = apply_kernel(xi, k)
    return n_f / xi.norm_sq


def parse_kernel_spec(spec):
    """Kernel from ``{"weak_value": [re, im]}`` or a pre/post/observable spec."""
    if not isinstance(spec, dict):
        raise BadParams("kernel spec must be an object")
    keys = set(spec)
    if keys == {"weak_value"}:
        re, im = spec["weak_value"]
        return PostselectionKernel(complex(re, im))
    if keys == {"pre", "post", "observable_bloch"}:
        pre = QubitState.from_amplitudes(*_parse_state(spec["pre"]))
        post = QubitState.from_amplitudes(*_parse_state(spec["post"]))
        return PostselectionKernel.from_states(
            pre, post, InvolutiveObservable(tuple(spec["observable_bloch"])))
    raise BadParams(f"unrecognized kernel spec keys {sorted(keys)}")


def _parse_state(entry):
    # [a0, a1] with complex entries as [re, im] pairs or plain reals
    if len(entry) != 2:
        raise BadParams(f"state needs two amplitudes, got {entry!r}")
    out = []
    for a in entry:
        if isinstance(a, (list, tuple)):
            out.append(complex(a[0], a[1]))
        else:
            out.append(complex(a))
    return out
