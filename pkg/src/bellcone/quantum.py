"""Quantum states, projective measurement models, and their coincidence data.

Complex floating point lives only here; exact verdicts belong to the
cone machinery, which ingests the probabilities this module produces.
Structural checks (hermiticity, trace, completeness) use a 1e-9
tolerance; values handed across modules are compared at 1e-8.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .farkas import ChPartitionSpec, FarkasVector, generate_ch
from .scenario import Scenario, ScenarioError, make_scenario

STRUCT_TOL = 1e-9
CROSS_TOL = 1e-8


@dataclass(frozen=True)
class QuantumState:
    """A density matrix over a tensor product of subsystems."""

    rho: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        arr = np.array(self.rho, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        size = math.prod(dims)
        if arr.shape != (size, size):
            raise ScenarioError(f"density matrix shape {arr.shape} != dims {dims}")
        if np.abs(arr - arr.conj().T).max() > STRUCT_TOL:
            raise ScenarioError("density matrix is not Hermitian")
        if abs(arr.trace() - 1) > STRUCT_TOL:
            raise ScenarioError("density matrix trace is not 1")
        if np.linalg.eigvalsh(arr).min() < -STRUCT_TOL:
            raise ScenarioError("density matrix has a negative eigenvalue")
        arr.setflags(write=False)
        object.__setattr__(self, "rho", arr)
        object.__setattr__(self, "dims", dims)


def pure_state(vector: Sequence[complex], dims: Sequence[int]) -> QuantumState:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return QuantumState(np.outer(v, v.conj()), tuple(dims))


def mixture(terms: Sequence[tuple[float, QuantumState]]) -> QuantumState:
    """Convex combination of states on identical subsystem structure."""
    if not terms:
        raise ScenarioError("mixture needs at least one term")
    dims = terms[0][1].dims
    if any(state.dims != dims for _, state in terms):
        raise ScenarioError("mixture terms must share subsystem dimensions")
    weights = np.array([w for w, _ in terms], dtype=float)
    if weights.min() < 0 or abs(weights.sum() - 1) > STRUCT_TOL:
        raise ScenarioError("mixture weights must be nonnegative and sum to 1")
    rho = sum(w * state.rho for w, state in terms)
    return QuantumState(rho, dims)


def tensor(a: QuantumState, b: QuantumState) -> QuantumState:
    """Joint state of two systems tested collectively."""
    return QuantumState(np.kron(a.rho, b.rho), a.dims + b.dims)


def singlet() -> QuantumState:
    v = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    return pure_state(v, (2, 2))


def werner(visibility: float) -> QuantumState:
    """Singlet mixed with white noise; separable up to visibility 1/3."""
    noise = QuantumState(np.eye(4, dtype=complex) / 4, (2, 2))
    return mixture([(visibility, singlet()), (1 - visibility, noise)])


# -- measurement models ---------------------------------------------------------


@dataclass(frozen=True)
class MeasurementModel:
    """Per observer, per setting, a complete set of orthogonal projectors."""

    projectors: tuple[tuple[tuple[np.ndarray, ...], ...], ...]
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        frozen: list[tuple[tuple[np.ndarray, ...], ...]] = []
        if len(self.projectors) != len(dims):
            raise ScenarioError("one projector family per subsystem required")
        for o, settings in enumerate(self.projectors):
            d = dims[o]
            obs_settings = []
            for i, projs in enumerate(settings):
                total = np.zeros((d, d), dtype=complex)
                outcome_projs = []
                for pi in projs:
                    arr = np.array(pi, dtype=complex)
                    if arr.shape != (d, d):
                        raise ScenarioError(
                            f"projector shape {arr.shape} != subsystem dim {d}"
                        )
                    if np.abs(arr - arr.conj().T).max() > STRUCT_TOL:
                        raise ScenarioError("projector is not Hermitian")
                    if np.abs(arr @ arr - arr).max() > STRUCT_TOL:
                        raise ScenarioError("projector is not idempotent")
                    total += arr
                    arr.setflags(write=False)
                    outcome_projs.append(arr)
                if np.abs(total - np.eye(d)).max() > STRUCT_TOL:
                    raise ScenarioError(
                        f"projectors of observer {o} setting {i} do not sum to identity"
                    )
                obs_settings.append(tuple(outcome_projs))
            frozen.append(tuple(obs_settings))
        object.__setattr__(self, "projectors", tuple(frozen))
        object.__setattr__(self, "dims", dims)

    def check_scenario(self, s: Scenario) -> None:
        if s.n_observers != len(self.dims):
            raise ScenarioError("observer count mismatch between model and scenario")
        for o, obs in enumerate(s.observers):
            if len(self.projectors[o]) != obs.n_settings:
                raise ScenarioError(f"observer {o}: setting count mismatch")
            for i, k in enumerate(obs.outcomes):
                if len(self.projectors[o][i]) != k:
                    raise ScenarioError(
                        f"observer {o} setting {i}: outcome count mismatch"
                    )


def basis_projectors(basis: np.ndarray) -> tuple[np.ndarray, ...]:
    """One rank-1 projector per column of a unitary basis matrix."""
    return tuple(
        np.outer(basis[:, j], basis[:, j].conj()) for j in range(basis.shape[1])
    )


def rotation_model(s: Scenario, angles: Sequence[Sequence[float]]) -> MeasurementModel:
    """Planar qubit analyzers: setting at angle t measures the basis
    (cos t, sin t), (-sin t, cos t).  Requires 2 outcomes per setting."""
    projs = []
    for o, obs in enumerate(s.observers):
        if any(k != 2 for k in obs.outcomes):
            raise ScenarioError("rotation model needs 2 outcomes per setting")
        if len(angles[o]) != obs.n_settings:
            raise ScenarioError(f"observer {o}: one angle per setting required")
        settings = []
        for t in angles[o]:
            basis = np.array(
                [[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]]
            )
            settings.append(basis_projectors(basis))
        projs.append(tuple(settings))
    return MeasurementModel(tuple(projs), tuple(2 for _ in s.observers))


# -- coincidence probabilities ---------------------------------------------------


def born_probabilities(
    state: QuantumState, model: MeasurementModel, s: Scenario
) -> list[float]:
    """Coincidence probability of every cell: trace against the projector
    product.  Sums to one per sector; marginals are setting-independent
    up to float error."""
    model.check_scenario(s)
    if state.dims != model.dims:
        raise ScenarioError("state and model subsystem dimensions differ")
    out = []
    for k in range(s.n_k):
        op = None
        for o, (setting, outcome) in enumerate(s.coincidence_at(k)):
            p = model.projectors[o][setting][outcome]
            op = p if op is None else np.kron(op, p)
        out.append(float(np.real(np.trace(state.rho @ op))))
    return out


def bell_value(
    state: QuantumState, model: MeasurementModel, s: Scenario, fv: FarkasVector
) -> float:
    probs = born_probabilities(state, model, s)
    return float(sum(f * p for f, p in zip(fv.components, probs)))


# -- partial transposition -------------------------------------------------------


def partial_transpose(
    state: QuantumState | np.ndarray,
    subsystems: int | Sequence[int],
    dims: Sequence[int] | None = None,
) -> np.ndarray:
    """Transpose the chosen subsystem indices; the result may fail to be
    a state, which is exactly what the test below looks for."""
    if isinstance(state, QuantumState):
        rho, dims = state.rho, state.dims
    else:
        if dims is None:
            raise ScenarioError("dims required when transposing a bare matrix")
        rho = np.asarray(state, dtype=complex)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    chosen = (subsystems,) if isinstance(subsystems, int) else tuple(subsystems)
    if any(not 0 <= i < n for i in chosen) or len(set(chosen)) != len(chosen):
        raise ScenarioError(f"invalid subsystem subset {chosen}")
    tensor_view = rho.reshape(dims + dims)
    for i in chosen:
        tensor_view = np.swapaxes(tensor_view, i, n + i)
    size = math.prod(dims)
    return tensor_view.reshape(size, size)


@dataclass(frozen=True)
class PptReport:
    """Minimal partial-transpose eigenvalue per proper subsystem subset."""

    min_eigenvalues: tuple[tuple[tuple[int, ...], float], ...]
    npt: bool

    @property
    def verdict(self) -> str:
        return "NPT" if self.npt else "PPT"


def ppt_test(state: QuantumState, *, tol: float = CROSS_TOL) -> PptReport:
    """Positivity of every partial transpose.

    A negative eigenvalue proves the state is not separable; passing the
    test is necessary for separability but not sufficient.
    """
    n = len(state.dims)
    if n < 2:
        raise ScenarioError("partial transposition needs at least 2 subsystems")
    entries = []
    npt = False
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            sigma = partial_transpose(state, subset)
            low = float(np.linalg.eigvalsh(sigma).min())
            entries.append((subset, low))
            if low < -tol:
                npt = True
    return PptReport(min_eigenvalues=tuple(entries), npt=npt)


def transpose_invariance_check(
    state: QuantumState,
    model: MeasurementModel,
    s: Scenario,
    fv: FarkasVector,
) -> tuple[float, float, float]:
    """Inequality value on (rho, model) versus on the partial transpose
    with the second observer's projectors conjugated.

    The two agree identically, even when the transposed matrix has
    negative eigenvalues; returns (value, transposed value, difference).
    """
    if s.n_observers != 2 or len(state.dims) != 2:
        raise ScenarioError("the invariance check is a two-observer statement")
    model.check_scenario(s)
    probs = born_probabilities(state, model, s)
    v1 = float(sum(f * p for f, p in zip(fv.components, probs)))
    sigma = partial_transpose(state, 1)
    v2 = 0.0
    for k in range(s.n_k):
        f = fv.components[k]
        if not f:
            continue
        (sa, xa), (sb, xb) = s.coincidence_at(k)
        op = np.kron(
            model.projectors[0][sa][xa], model.projectors[1][sb][xb].conj()
        )
        v2 += f * float(np.real(np.trace(sigma @ op)))
    return v1, v2, v1 - v2


# -- the three-party post-selection example --------------------------------------


@dataclass(frozen=True)
class PostSelectionReport:
    initial: QuantumState
    success_probability: float
    post_state: QuantumState
    fidelity: float
    wrong_basis_purity: float
    ch_value: float


def ghz_postselect() -> PostSelectionReport:
    """Three qubits in (|000> + |111>)/sqrt(2); the first observer tests
    for the Hadamard-rotated state u = (|0> + |1>)/sqrt(2).

    Success leaves the other two qubits maximally entangled, with
    success probability 1/2; the residual state violates the four-sector
    inequality as deeply as a directly prepared entangled pair.  Testing
    for |0> instead leaves a product state (purity of the reduced state
    is 1).
    """
    psi = np.zeros(8, dtype=complex)
    psi[0] = psi[7] = 1 / math.sqrt(2)
    initial = pure_state(psi, (2, 2, 2))

    u = np.array([1, 1], dtype=complex) / math.sqrt(2)
    amp = u.conj() @ psi.reshape(2, 4)
    success = float(np.real(np.vdot(amp, amp)))
    post_vec = amp / np.linalg.norm(amp)
    post_state = pure_state(post_vec, (2, 2))
    target = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    fidelity = float(abs(np.vdot(target, post_vec)) ** 2)

    wrong = np.array([1, 0], dtype=complex).conj() @ psi.reshape(2, 4)
    wrong = wrong / np.linalg.norm(wrong)
    reduced = (np.outer(wrong, wrong.conj()).reshape(2, 2, 2, 2)).trace(
        axis1=1, axis2=3
    )
    wrong_purity = float(np.real(np.trace(reduced @ reduced)))

    s = make_scenario([2, 2], [2, 2])
    model = rotation_model(
        s, [[0.0, math.pi / 4], [math.pi / 8, -math.pi / 8]]
    )
    fv = generate_ch(
        s,
        ChPartitionSpec(
            obs_a=0,
            obs_b=1,
            neg_setting_a=0,
            neg_setting_b=0,
            pos_setting_a=1,
            pos_setting_b=1,
            part_neg_a=(0,),
            part_pos_a=(0,),
            part_neg_b=(0,),
            part_pos_b=(0,),
        ),
    )
    ch_value = bell_value(post_state, model, s, fv)
    return PostSelectionReport(
        initial=initial,
        success_probability=success,
        post_state=post_state,
        fidelity=fidelity,
        wrong_basis_purity=wrong_purity,
        ch_value=ch_value,
    )


def pointwise_ch_identity_check() -> tuple[bool, dict[tuple[int, int, int, int], int]]:
    """Exhaustively evaluate a(1-m) + b(1-n) + n m - a b over binary tuples.

    This four-variable expression staying in [0, 1] is the pointwise core
    of why factorable states satisfy the four-sector inequality.
    """
    table = {}
    ok = True
    for a, n, b, m in itertools.product((0, 1), repeat=4):
        value = a * (1 - m) + b * (1 - n) + n * m - a * b
        table[(a, n, b, m)] = value
        ok = ok and 0 <= value <= 1
    return ok, table


# -- file formats ---------------------------------------------------------------


def format_state(state: QuantumState) -> str:
    header = "state " + " ".join(str(d) for d in state.dims)
    body = []
    for row in state.rho:
        body.append(" ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in row))
    return header + "\n" + "\n".join(body) + "\n"


def parse_state(text: str) -> QuantumState:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("state"):
        raise ScenarioError("state file must start with a 'state' header")
    try:
        dims = tuple(int(tok) for tok in lines[0].split()[1:])
    except ValueError as exc:
        raise ScenarioError(f"bad state dims: {exc}") from exc
    if not dims:
        raise ScenarioError("state header names no subsystems")
    size = math.prod(dims)
    tokens = " ".join(lines[1:]).split()
    if len(tokens) != 2 * size * size:
        raise ScenarioError(
            f"expected {2 * size * size} numbers, found {len(tokens)}"
        )
    values = [float(tok) for tok in tokens]
    rho = np.array(
        [complex(values[2 * i], values[2 * i + 1]) for i in range(size * size)]
    ).reshape(size, size)
    return QuantumState(rho, dims)


def format_model(model: MeasurementModel) -> str:
    lines = ["model"]
    for o, settings in enumerate(model.projectors):
        d = model.dims[o]
        lines.append(f"observer {o} dim {d}")
        for i, projs in enumerate(settings):
            lines.append(f"setting {i} outcomes {len(projs)}")
            for x, proj in enumerate(projs):
                lines.append(f"projector {x}")
                for row in proj:
                    lines.append(
                        " ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in row)
                    )
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> MeasurementModel:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "model":
        raise ScenarioError("model file must start with a 'model' header")
    pos = 1
    observers: list[tuple[tuple[np.ndarray, ...], ...]] = []
    dims: list[int] = []
    while pos < len(lines):
        fields = lines[pos].split()
        if fields[:1] != ["observer"] or len(fields) != 4 or fields[2] != "dim":
            raise ScenarioError(f"expected 'observer <o> dim <d>', got {lines[pos]!r}")
        if int(fields[1]) != len(observers):
            raise ScenarioError("observers must appear in order")
        d = int(fields[3])
        pos += 1
        settings = []
        while pos < len(lines) and lines[pos].startswith("setting"):
            sfields = lines[pos].split()
            if len(sfields) != 4 or sfields[2] != "outcomes":
                raise ScenarioError(f"bad setting header {lines[pos]!r}")
            n_out = int(sfields[3])
            pos += 1
            projs = []
            for x in range(n_out):
                if pos >= len(lines) or lines[pos].split() != ["projector", str(x)]:
                    raise ScenarioError(f"expected 'projector {x}'")
                pos += 1
                numbers: list[float] = []
                while len(numbers) < 2 * d * d:
                    if pos >= len(lines):
                        raise ScenarioError("truncated projector block")
                    numbers.extend(float(tok) for tok in lines[pos].split())
                    pos += 1
                if len(numbers) != 2 * d * d:
                    raise ScenarioError("projector block has stray numbers")
                proj = np.array(
                    [
                        complex(numbers[2 * i], numbers[2 * i + 1])
                        for i in range(d * d)
                    ]
                ).reshape(d, d)
                projs.append(proj)
            settings.append(tuple(projs))
        observers.append(tuple(settings))
        dims.append(d)
    return MeasurementModel(tuple(observers), tuple(dims))
