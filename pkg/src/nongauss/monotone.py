"""Restricted non-Gaussianity monotones for conditional maps.

delta_tilde maximizes the joint-output non-Gaussianity over the four
parameter entangled input family D_α R_θ S_r |ζ⟩; d_g_bound evaluates the
unentangled lower bound on Gaussian inputs.  Photon subtraction and
addition get an exact analytic backend through Gaussian moment factoring
on the TMSV; everything else runs on the truncated Fock backend.

Objective evaluations at distinct parameter points are independent; the
search aggregates them in a fixed order, so results are deterministic for
a given seed.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import TruncationError, UnsupportedMapError, ZeroProbabilityError
from .fock import (
    DEFAULT_CUTOFF,
    MomentRecord,
    apply_map,
    apply_unitary,
    build_state,
    build_unitary,
    covariance_from_moments,
    delta_g,
    gaussian_to_fock,
    number_distribution,
)
from .gaussian import (
    GaussianState,
    apply_symplectic,
    gaussian_entropy,
    gaussian_unitary,
    thermal_entropy,
    thermal_state,
    tmsv_state,
)
from .maps import normalization_pna, normalization_pns

DEFAULT_NS_GRID = (0.5, 1.0, 2.0, 4.0)
DEFAULT_ENERGY_GRID = (1.0, 2.0, 4.0, 8.0)
SLOPE_MIN = 0.5
PLATEAU_TOL = 0.05

# deterministic multi-start lattice for the δ̃ search
_LATTICE_ALPHA = (0.0, 0.5, 1.0, 1.5)
_LATTICE_THETA = (0.0, np.pi / 4.0, np.pi / 2.0)
_LATTICE_R = (0.0, 0.3, 0.6)
_LATTICE_NS = (0.1, 0.5, 1.0, 2.0)

# |α|, |θ|, |r|, N_S caps during simplex refinement (truncation budget)
_CAP_ALPHA = 3.0
_CAP_THETA = np.pi
_CAP_R = 1.5
_CAP_NS = 4.0


@dataclass(frozen=True)
class InputParams:
    """Parameters of the input family (I ⊗ D_α R_θ S_r)|ζ⟩."""

    alpha: complex
    theta: float
    r: float
    n_s: float

    def __post_init__(self):
        if self.n_s < 0.0:
            raise ValueError("n_s must be nonnegative")
        vals = np.array([self.alpha, self.theta, self.r, self.n_s], dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise ValueError("parameters must be finite")


@dataclass(frozen=True)
class MonotoneResult:
    """Outcome of a monotone evaluation.

    quantity marks which bound this is ('delta_tilde' or 'd_g_lower_bound');
    value is a certified lower bound on the true supremum, never below any
    entry of its own evaluation trace.
    """

    quantity: str
    value: float
    argmax: object
    evaluations: int
    trace: tuple
    diagnostics: dict

    def __post_init__(self):
        finite = [v for _, v in self.trace if np.isfinite(v)]
        if finite and self.value < max(finite) - 1e-12:
            raise ValueError("result value below its own evaluation trace")


@dataclass(frozen=True)
class DivergenceProfile:
    """δ values along an energy grid plus the fitted growth rate.

    The profile is a diagnostic of the constrained bound, not a monotone;
    slope is fitted against log₂(energy) over the top half of the grid.
    """

    grid: tuple
    deltas: tuple
    slope: float
    classification: str
    quantity: str

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.size < 4:
            raise ValueError("grid needs at least 4 points")
        if np.any(np.diff(g) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if min(self.deltas) < -1e-6:
            raise ValueError("negative delta in profile")


def input_family(p, backend="gaussian", cutoff=DEFAULT_CUTOFF, trace_tol=1e-3):
    """Two-mode pure state (I ⊗ D_α R_θ S_r)|ζ⟩ with TMSV occupation n_s.

    The displacement, rotation and squeeze act on the second mode (the one
    the map will consume).  backend 'gaussian' returns the exact
    GaussianState; 'fock' a truncated ket carrying its build deficit.
    """
    ops = (("squeeze", p.r), ("rotation", p.theta), ("displacement", p.alpha))
    if backend == "gaussian":
        state = tmsv_state(p.n_s)
        for kind, par in ops:
            state = apply_symplectic(
                state, gaussian_unitary(kind, par, n_modes=2, targets=[1])
            )
        return state
    if backend == "fock":
        ket = build_state("tmsv", p.n_s, cutoff, trace_tol=trace_tol)
        for kind, par in ops:
            ket = apply_unitary(ket, build_unitary(kind, par, cutoff), targets=[1])
        return ket
    raise ValueError(f"unknown backend {backend!r}")


# Weight parked in the top two number levels of any mode.  Second moments
# weight occupancy by n², so edge mass e costs the objective roughly e·d²;
# 1e-6 keeps that below ~1e-2 at the cutoffs in use.
_EDGE_TOL = 1e-6

# finite stand-in for excluded points so the simplex comparisons stay quiet
_PENALTY = -1e9


def _edge_occupancy(state):
    # in-box unitaries fold escaping amplitude back instead of losing norm,
    # so truncation shows up as weight parked in the top number levels
    return max(
        float(number_distribution(state, mode)[-2:].sum())
        for mode in range(state.n_modes)
    )


def _parse_symbol(token):
    if isinstance(token, tuple):
        mode, dag = token
        if mode in (0, 1) and dag in (0, 1):
            return (int(mode), int(dag))
        raise ValueError(f"bad ladder symbol {token!r}")
    text = str(token).strip()
    head, tail = text[:1].upper(), text[1:]
    if head not in ("A", "B") or tail not in ("", "†", "+", "dag"):
        raise ValueError(f"bad ladder symbol {token!r}")
    return (0 if head == "A" else 1, 0 if tail == "" else 1)


def _wick(word, n_s):
    # ordered-pair contractions on the zero-mean TMSV; recursion over all
    # pairings of the first symbol
    if len(word) % 2:
        return 0.0 + 0.0j
    if not word:
        return 1.0 + 0.0j
    c_p = np.sqrt(n_s * (n_s + 1.0))

    def pair(left, right):
        (m1, d1), (m2, d2) = left, right
        if m1 == m2:
            if d1 == d2:
                return 0.0
            return n_s + 1.0 if d1 == 0 else n_s
        return c_p if d1 == d2 else 0.0

    total = 0.0 + 0.0j
    first = word[0]
    for j in range(1, len(word)):
        w = pair(first, word[j])
        if w != 0.0:
            total += w * _wick(word[1:j] + word[j + 1 :], n_s)
    return total


def tmsv_wick_expectation(word, n_s):
    """Ordered expectation of a ladder word on the TMSV by Wick pairing.

    Symbols are 'A', 'A†', 'B', 'B†' (ASCII 'A+', 'B+' also accepted) or
    (mode, dagger) pairs; operator order inside each contraction is kept,
    so ⟨a a†⟩ = n_s + 1 while ⟨a† a⟩ = n_s.  Odd words vanish.
    """
    if n_s < 0.0:
        raise ValueError("n_s must be nonnegative")
    parsed = tuple(_parse_symbol(t) for t in word)
    if len(parsed) > 6:
        raise ValueError("words longer than six symbols are not supported")
    return complex(_wick(parsed, float(n_s)))


_A, _ADAG = (0, 0), (0, 1)
_B, _BDAG = (1, 0), (1, 1)


def _poly_mul(p1, p2):
    out = {}
    for w1, c1 in p1.items():
        for w2, c2 in p2.items():
            key = w1 + w2
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def analytic_output_covariance(p, which):
    """Exact joint mean and covariance of the PNS/PNA output state.

    Every needed moment ⟨ξ|X|ξ⟩ = N² ⟨ζ|M† (G†XG) M|ζ⟩ is expanded into
    ladder words (G = D_α R_θ S_r on the consumed mode, M = G†aG for
    subtraction and its adjoint for addition) and evaluated by Wick
    pairing; the covariance then follows from the moment table.
    """
    if which not in ("pns", "pna"):
        raise UnsupportedMapError(f"no analytic backend for {which!r}")
    alpha = complex(p.alpha)
    phase = np.exp(-1j * p.theta)
    c1, c2 = phase * np.cosh(p.r), -phase * np.sinh(p.r)
    l_g = {(_B,): c1, (_BDAG,): c2, (): alpha}
    l_g_dag = {(_BDAG,): np.conj(c1), (_B,): np.conj(c2), (): np.conj(alpha)}
    if which == "pns":
        norm = normalization_pns(abs(alpha), p.r, p.n_s)
        m_left, m_right = l_g_dag, l_g
    else:
        norm = normalization_pna(abs(alpha), p.r, p.n_s)
        m_left, m_right = l_g, l_g_dag
    n_sq = norm * norm

    def conjugated(x_word):
        poly = {(): 1.0 + 0.0j}
        for s in x_word:
            if s == _B:
                poly = _poly_mul(poly, l_g)
            elif s == _BDAG:
                poly = _poly_mul(poly, l_g_dag)
            else:
                poly = _poly_mul(poly, {(s,): 1.0 + 0.0j})
        return poly

    def expect(*x_word):
        sandwich = _poly_mul(m_left, _poly_mul(conjugated(x_word), m_right))
        total = sum(c * _wick(w, p.n_s) for w, c in sandwich.items())
        return n_sq * total

    first = np.array([expect(_A), expect(_B)])
    ab = expect(_A, _B)
    aa = np.array([[expect(_A, _A), ab], [ab, expect(_B, _B)]])
    adag_a = np.array(
        [
            [expect(_ADAG, _A), expect(_ADAG, _B)],
            [expect(_BDAG, _A), expect(_BDAG, _B)],
        ]
    )
    return covariance_from_moments(MomentRecord(2, first, aa, adag_a))


def _is_conditional_unitary(cmap):
    tag, payload = cmap.body
    if cmap.n_in != cmap.n_out:
        return False
    return tag == "unitary" or (tag == "kraus" and len(payload) == 1)


def _clamp(x, n_s_cap):
    return InputParams(
        complex(min(abs(float(x[0])), _CAP_ALPHA)),
        float(np.clip(x[1], -_CAP_THETA, _CAP_THETA)),
        float(np.clip(x[2], -_CAP_R, _CAP_R)),
        float(min(abs(float(x[3])), n_s_cap)),
    )


def alpha_zero_spread(which, seed=0, count=10):
    """Spread of the analytic objective along random rays at α = 0."""
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(count):
        p = InputParams(
            0.0,
            float(rng.uniform(0.0, np.pi)),
            float(rng.uniform(0.0, 0.8)),
            float(rng.uniform(0.1, 2.0)),
        )
        vals.append(gaussian_entropy(analytic_output_covariance(p, which)))
    return float(max(vals) - min(vals))


def delta_tilde(desc, seed=0, cutoff=None, max_n_s=_CAP_NS, refine=True):
    """Maximize joint-output non-Gaussianity over the input family.

    The returned value is the running maximum over every evaluation
    (deterministic lattice, then simplex refinement from the three best
    starts plus two seeded jitters), hence a certified lower bound on the
    true supremum.  Probe points the cutoff cannot represent faithfully
    are excluded from the search rather than evaluated with inflated
    truncation error.  Raises UnsupportedMapError for anything that is
    not a conditional unitary map.
    """
    body = desc.body
    if not _is_conditional_unitary(body):
        raise UnsupportedMapError(
            "delta_tilde needs a conditional unitary map; use d_g_bound or "
            "divergence_profile for channels"
        )
    if body.n_in != 1:
        raise UnsupportedMapError("the input family covers single-mode maps only")
    analytic = desc.name in ("pns", "pna")
    d = desc.cutoff if cutoff is None else cutoff
    deficits = [0.0]
    excluded = [0]
    trace = []

    def evaluate(x):
        p = _clamp(x, max_n_s)
        try:
            if analytic:
                val = gaussian_entropy(analytic_output_covariance(p, desc.name))
            else:
                ket = input_family(p, "fock", cutoff=d)
                if _edge_occupancy(ket) > _EDGE_TOL:
                    raise TruncationError("input family spills over the cutoff")
                deficits.append(ket.trace_deficit)
                out, _ = apply_map(ket, body, targets=[1], trace_tol=1e-2)
                if _edge_occupancy(out) > _EDGE_TOL:
                    raise TruncationError("map output spills over the cutoff")
                val = delta_g(out)
        except ZeroProbabilityError:
            val = -np.inf
        except TruncationError:
            excluded[0] += 1
            val = -np.inf
        trace.append((p, val))
        return val if np.isfinite(val) else _PENALTY

    lattice_ns = sorted({min(n, max_n_s) for n in _LATTICE_NS})
    for a in _LATTICE_ALPHA:
        for t in _LATTICE_THETA:
            for r in _LATTICE_R:
                for n in lattice_ns:
                    evaluate(np.array([a, t, r, n]))

    order = sorted(
        range(len(trace)), key=lambda i: (-trace[i][1], i)
    )
    starts = [trace[i][0] for i in order[:3]]
    rng = np.random.default_rng(seed)
    top = starts[0]
    for _ in range(2):
        jitter = rng.normal(scale=0.05, size=4)
        starts.append(
            _clamp(
                np.array([abs(top.alpha), top.theta, top.r, top.n_s]) + jitter,
                max_n_s,
            )
        )
    if refine:
        for p0 in starts:
            x0 = np.array([abs(p0.alpha), p0.theta, p0.r, p0.n_s])
            optimize.minimize(
                lambda x: -evaluate(x),
                x0,
                method="Nelder-Mead",
                options={"xatol": 1e-4, "fatol": 1e-7, "maxfev": 120},
            )
    values = np.array([v for _, v in trace])
    best = int(np.argmax(values))
    if not np.isfinite(values[best]):
        raise TruncationError(
            "every probe point spills over the cutoff; raise it",
            suggested_cutoff=2 * d,
        )
    diagnostics = {
        "backend": "analytic" if analytic else "fock",
        "max_deficit": float(max(deficits)),
        "excluded": excluded[0],
        "xatol": 1e-4,
    }
    if analytic:
        diagnostics["alpha_zero_spread"] = alpha_zero_spread(desc.name, seed=seed)
    return MonotoneResult(
        "delta_tilde",
        float(values[best]),
        trace[best][0],
        len(trace),
        tuple(trace),
        diagnostics,
    )


def _coherent_input(alpha):
    return GaussianState(1, np.array([2.0 * alpha, 0.0]), np.eye(2))


def _displaced_squeezed_input(energy):
    # at fixed mean photon number, anti-squeeze q and displace along p;
    # variance split u = 2E+1 maximizes the spread a dephasing map can
    # convert into Gaussian entropy
    u = 2.0 * energy + 1.0
    p_sq = max(4.0 * energy + 2.0 - u - 1.0 / u, 0.0)
    cov = np.diag([u, 1.0 / u])
    return GaussianState(1, np.array([0.0, np.sqrt(p_sq)]), cov)


def _squeezed_thermal_input(energy_cap, rng):
    n_th = float(rng.uniform(0.0, 0.4)) * energy_cap
    cosh_cap = (2.0 * energy_cap + 1.0) / (2.0 * n_th + 1.0)
    r = 0.5 * np.arccosh(float(rng.uniform(1.0, cosh_cap)))
    state = thermal_state(n_th)
    state = apply_symplectic(state, gaussian_unitary("squeeze", r, 1))
    theta = float(rng.uniform(0.0, np.pi))
    return apply_symplectic(state, gaussian_unitary("rotation", theta, 1))


def gaussian_mean_photons(state):
    """Mean photon number of a Gaussian state, (tr Λ + |x̄|²)/4 − n/2."""
    return float(
        (np.trace(state.cov) + state.mean @ state.mean) / 4.0 - state.n_modes / 2.0
    )


def _default_gaussian_inputs(energy, rng, count):
    inputs = []
    if energy is None:
        alphas = (0.5, 1.0, 1.5, 2.0)
        ds_energies = (1.0, 2.0)
        cap = 2.0
    else:
        alphas = tuple(np.sqrt(energy * f) for f in (0.25, 0.5, 1.0))
        ds_energies = (float(energy),)
        cap = float(energy)
    for a in alphas:
        inputs.append((("coherent", round(float(a), 6)), _coherent_input(a)))
    for e in ds_energies:
        inputs.append((("displaced_squeezed", e), _displaced_squeezed_input(e)))
    for i in range(count):
        inputs.append((("squeezed_thermal", i), _squeezed_thermal_input(cap, rng)))
    return inputs


def d_g_bound(desc, inputs=None, energy=None, seed=0, cutoff=None, count=4):
    """Lower bound on δ̃ from unentangled Gaussian inputs.

    With no explicit inputs, evaluates a coherent grid, a displaced
    squeezed state, and seeded squeezed-thermal samples, all within the
    energy budget when one is given.  inputs may be a list of
    GaussianState or (label, GaussianState) pairs.  Inputs the cutoff
    cannot hold are skipped, keeping the value a faithful lower bound.
    """
    body = desc.body
    if body.n_in != 1:
        raise UnsupportedMapError("d_g_bound expects a single-mode map")
    if inputs is None:
        rng = np.random.default_rng(seed)
        supplied = _default_gaussian_inputs(energy, rng, count)
    else:
        supplied = [
            g if isinstance(g, tuple) else (("input", i), g)
            for i, g in enumerate(inputs)
        ]
    if not supplied:
        raise ValueError("no Gaussian inputs supplied")
    d = desc.cutoff if cutoff is None else cutoff
    trace = []
    deficits = [0.0]
    excluded = 0
    for label, g in supplied:
        try:
            rho = gaussian_to_fock(g, d, trace_tol=1e-5)
            deficits.append(rho.trace_deficit)
            out, _ = apply_map(rho, body, trace_tol=1e-2)
            val = delta_g(out)
        except ZeroProbabilityError:
            val = -np.inf
        except TruncationError:
            excluded += 1
            val = -np.inf
        trace.append((label, val))
    values = np.array([v for _, v in trace])
    if not np.any(np.isfinite(values)):
        raise TruncationError(
            "no Gaussian input fits the cutoff", deficit=float(max(deficits))
        )
    best = int(np.argmax(values))
    diagnostics = {
        "backend": "fock",
        "max_deficit": float(max(deficits)),
        "excluded": excluded,
        "energy": energy,
    }
    return MonotoneResult(
        "d_g_lower_bound",
        float(values[best]),
        trace[best][0],
        len(trace),
        tuple(trace),
        diagnostics,
    )


def divergence_profile(
    desc,
    grid=None,
    slope_min=SLOPE_MIN,
    plateau_tol=PLATEAU_TOL,
    seed=0,
    cutoff=None,
    count=3,
):
    """Classify growth of the best available lower bound against energy.

    Maps with the analytic input-family backend (pns, pna) route through
    delta_tilde with the family's N_S capped at each grid value; all other
    maps route through d_g_bound with the grid value as the input energy
    budget.  Slope is fitted over the top half of the grid; the label is
    'finite' on a plateau (within plateau_tol), 'diverging' on a monotone
    rise with slope ≥ slope_min, 'inconclusive' otherwise.
    """
    via_family = desc.name in ("pns", "pna")
    if grid is None:
        grid = DEFAULT_NS_GRID if via_family else DEFAULT_ENERGY_GRID
    grid = tuple(float(e) for e in grid)
    if len(grid) < 4:
        raise ValueError("grid needs at least 4 points")
    deltas = []
    for e in grid:
        if via_family:
            res = delta_tilde(desc, seed=seed, cutoff=cutoff, max_n_s=e)
        else:
            res = d_g_bound(desc, energy=e, seed=seed, cutoff=cutoff, count=count)
        deltas.append(res.value)
    half = len(grid) // 2
    top_x = np.log2(np.asarray(grid[half:]))
    top_d = np.asarray(deltas[half:])
    slope = float(np.polyfit(top_x, top_d, 1)[0])
    spread = float(top_d.max() - top_d.min())
    rising = bool(np.all(np.diff(top_d) > -1e-9))
    if spread <= plateau_tol:
        label = "finite"
    elif slope >= slope_min and rising:
        label = "diverging"
    else:
        label = "inconclusive"
    quantity = "delta_tilde" if via_family else "d_g_lower_bound"
    return DivergenceProfile(grid, tuple(deltas), slope, label, quantity)


def mixed_unitary_bounds(probabilities, s_g_max):
    """δ̃ interval for a probabilistic mixture of Gaussian unitaries.

    Returns [max(S_G^max − h({p}), 0), S_G^max] with h the Shannon entropy
    of the mixing distribution in bits.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probabilities must be a nonempty vector")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("probabilities must form a distribution")
    nz = p[p > 0.0]
    h = float(-(nz * np.log2(nz)).sum())
    s = float(s_g_max)
    return (max(s - h, 0.0), s)


def gd_upper_bound(desc, seed=0, samples=4, slack=1e-3, return_samples=False):
    """Bound δ̃ of a Gaussian-dilatable channel by δ_G of its environment.

    Also pushes seeded input-family members through the channel and checks
    the sampled joint-output δ_G never exceeds the bound (within slack).
    With return_samples the sampled maximum comes back alongside the bound.
    """
    env = desc.metadata.get("environment")
    if env is None:
        raise UnsupportedMapError("descriptor carries no environment state")
    bound = delta_g(env)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        p = InputParams(
            complex(rng.uniform(0.0, 0.8)),
            float(rng.uniform(0.0, np.pi)),
            float(rng.uniform(0.0, 0.4)),
            float(rng.uniform(0.05, 1.0)),
        )
        ket = input_family(p, "fock", cutoff=desc.cutoff)
        out, _ = apply_map(ket, desc.body, targets=[1], trace_tol=1e-2)
        worst = max(worst, delta_g(out))
    if worst > bound + slack:
        raise RuntimeError(
            f"sampled output non-Gaussianity {worst:.6f} exceeds the "
            f"environment bound {bound:.6f}"
        )
    if return_samples:
        return float(bound), float(worst)
    return float(bound)


def energy_ceiling(energy, n_modes=1):
    """Largest δ_G attainable at the given mean photon number."""
    if energy <= 0.0:
        return 0.0
    return float(n_modes) * thermal_entropy(energy / n_modes)
