"""Truncated Fock-space engine: states and maps as finite complex arrays,
entropies, moment extraction, and the Gaussian resource-destroying map.

Kets over n modes are stored as tensors of shape (D,)*n; density matrices as
(D**n, D**n) matrices with C-ordered multi-indices (mode 0 most significant).
Quadrature conventions match the phase-space module: q = a + a†, p = i(a† − a),
so means and covariances can move freely between the two backends.
"""

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.linalg import expm, logm, polar

from .errors import InvalidStateError, TruncationError, ZeroProbabilityError
from .gaussian import (
    GaussianState,
    SymplecticOp,
    gaussian_entropy,
    symplectic_form,
    williamson,
)

DEFAULT_CUTOFF = 40
BUILD_DEFICIT_TOL = 1e-8
APPLY_DEFICIT_TOL = 1e-6
ENTROPY_CLAMP = 1e-12
SUPPORT_TOL = 1e-12

# Dense matrix exponentials above this total dimension are refused.
_MAX_DENSE_DIM = 4096


def ladder(cutoff):
    """Annihilation operator a|n⟩ = √n|n−1⟩ on the basis 0..cutoff−1."""
    if cutoff < 2:
        raise ValueError(f"cutoff must be >= 2, got {cutoff}")
    return np.diag(np.sqrt(np.arange(1.0, cutoff)), k=1).astype(complex)


@dataclass(frozen=True)
class FockArray:
    """Truncated Fock representation of a ket or a density matrix.

    trace_deficit records 1 − ⟨ψ|ψ⟩ (ket) or 1 − Tr ρ (density); it must not
    exceed trace_tol. States are kept unnormalized-by-truncation so the
    deficit stays observable.
    """

    n_modes: int
    cutoff: int
    kind: str
    data: np.ndarray
    trace_tol: float = APPLY_DEFICIT_TOL
    trace_deficit: float = field(init=False)

    def __post_init__(self):
        n, d = self.n_modes, self.cutoff
        if n < 1:
            raise ValueError(f"need at least one mode, got {n}")
        if d < 2:
            raise ValueError(f"cutoff must be >= 2, got {d}")
        if self.kind not in ("ket", "density"):
            raise ValueError(f"kind must be 'ket' or 'density', got {self.kind!r}")
        data = np.array(self.data, dtype=complex)
        dim = d**n
        if self.kind == "ket":
            if data.size != dim:
                raise ValueError(f"ket size {data.size} != {d}^{n}")
            data = data.reshape((d,) * n)
            deficit = 1.0 - float(np.vdot(data, data).real)
        else:
            if data.shape != (dim, dim):
                raise ValueError(f"density shape {data.shape} != ({dim}, {dim})")
            if np.max(np.abs(data - data.conj().T)) > 1e-10:
                raise InvalidStateError("density matrix is not Hermitian")
            deficit = 1.0 - float(np.trace(data).real)
        if not np.all(np.isfinite(data)):
            raise ValueError("non-finite entries")
        if deficit < -1e-9:
            raise InvalidStateError(f"trace exceeds 1 by {-deficit:.3e}")
        if deficit > self.trace_tol:
            raise TruncationError(
                f"trace deficit {deficit:.3e} exceeds bound {self.trace_tol:.1e}",
                deficit=deficit,
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "trace_deficit", deficit)

    def to_density(self):
        """Outer product for kets; identity on densities."""
        if self.kind == "density":
            return self
        flat = self.data.reshape(-1)
        return FockArray(
            self.n_modes, self.cutoff, "density", np.outer(flat, flat.conj()),
            trace_tol=self.trace_tol,
        )

    def tensor(self):
        """Density data reshaped to 2*n_modes axes (ket indices first)."""
        if self.kind != "density":
            raise ValueError("tensor() is for densities; kets already are tensors")
        return self.data.reshape((self.cutoff,) * (2 * self.n_modes))


@dataclass(frozen=True)
class ConditionalMap:
    """A conditional quantum map ρ → T(ρ)/Tr T(ρ) (or the channel T itself).

    body is one of ('unitary', U), ('kraus', (K₁, …)), or
    ('mixture', ((p₁, U₁), …)). renormalize=True gives the post-selected map.
    """

    n_in: int
    n_out: int
    body: tuple
    renormalize: bool

    def __post_init__(self):
        tag, payload = self.body
        if tag == "kraus":
            if len(payload) == 0:
                raise ValueError("Kraus list must be nonempty")
        elif tag == "mixture":
            total = sum(p for p, _ in payload)
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"mixture probabilities sum to {total}, not 1")
            if self.n_in != self.n_out:
                raise ValueError("unitary mixtures cannot change mode count")
        elif tag == "unitary":
            if self.n_in != self.n_out:
                raise ValueError("a unitary cannot change mode count")
        else:
            raise ValueError(f"unknown body tag {tag!r}")


def _coherent_amplitudes(alpha, cutoff):
    c = np.empty(cutoff, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, cutoff):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def _state_vector(kind, params, cutoff):
    """Raw data and exact trace deficit for each supported state family."""
    if kind == "vacuum":
        ket = np.zeros(cutoff, dtype=complex)
        ket[0] = 1.0
        return 1, "ket", ket, 0.0
    if kind == "fock":
        n = int(params)
        if n < 0:
            raise ValueError(f"photon number must be >= 0, got {n}")
        if n >= cutoff:
            raise TruncationError(
                f"fock({n}) needs cutoff > {n}", deficit=1.0, suggested_cutoff=n + 1
            )
        ket = np.zeros(cutoff, dtype=complex)
        ket[n] = 1.0
        return 1, "ket", ket, 0.0
    if kind == "coherent":
        c = _coherent_amplitudes(complex(params), cutoff)
        return 1, "ket", c, 1.0 - float(np.vdot(c, c).real)
    if kind == "cat":
        alpha = complex(params)
        c = _coherent_amplitudes(alpha, cutoff) + _coherent_amplitudes(-alpha, cutoff)
        norm_sq = 2.0 * (1.0 + np.exp(-2.0 * abs(alpha) ** 2))
        c = c / np.sqrt(norm_sq)
        return 1, "ket", c, 1.0 - float(np.vdot(c, c).real)
    if kind == "thermal":
        N = float(params)
        if N < 0:
            raise ValueError(f"mean photon number must be >= 0, got {N}")
        if N == 0.0:
            p = np.zeros(cutoff)
            p[0] = 1.0
        else:
            p = (N / (N + 1.0)) ** np.arange(cutoff) / (N + 1.0)
        return 1, "density", np.diag(p.astype(complex)), 1.0 - float(p.sum())
    if kind == "tmsv":
        N_S = float(params)
        if N_S < 0:
            raise ValueError(f"N_S must be >= 0, got {N_S}")
        lam = np.sqrt(N_S / (N_S + 1.0))
        c = lam ** np.arange(cutoff) / np.sqrt(N_S + 1.0)
        ket = np.zeros((cutoff, cutoff), dtype=complex)
        np.fill_diagonal(ket, c)
        return 2, "ket", ket, 1.0 - float(c @ c)
    raise ValueError(f"unknown state kind: {kind!r}")


def build_state(kind, params=None, cutoff=DEFAULT_CUTOFF, trace_tol=BUILD_DEFICIT_TOL):
    """Normalized Fock state of a named family, within the recorded deficit.

    Kinds: 'vacuum', 'fock' (n), 'coherent' (complex α), 'cat' (even coherent
    superposition, α), 'thermal' (N), 'tmsv' (N_S, Schmidt series with
    λ = √(N_S/(N_S+1))).

    :raises TruncationError: deficit above trace_tol, with a suggested cutoff.
    """
    n_modes, arr_kind, data, deficit = _state_vector(kind, params, cutoff)
    if deficit > trace_tol:
        suggestion = None
        d = cutoff
        while d <= 65536:
            d *= 2
            if _state_vector(kind, params, d)[3] <= trace_tol:
                suggestion = d
                break
        raise TruncationError(
            f"{kind} state loses {deficit:.3e} of its weight at cutoff {cutoff}",
            deficit=deficit,
            suggested_cutoff=suggestion,
        )
    return FockArray(n_modes, cutoff, arr_kind, data, trace_tol=trace_tol)


def _bs_sector_expm(theta, cutoff):
    """exp(ϑ(ab† − a†b)) assembled per total-photon sector.

    The truncated generator preserves n₁+n₂, so this equals the dense
    exponential of the boxed generator at a fraction of the cost.
    """
    d = cutoff
    u = np.zeros((d * d, d * d), dtype=complex)
    for total in range(2 * d - 1):
        lo = max(0, total - d + 1)
        hi = min(total, d - 1)
        ks = np.arange(lo, hi + 1)
        idx = ks * d + (total - ks)
        m = len(ks)
        g = np.zeros((m, m))
        for i in range(m - 1):
            k = ks[i + 1]
            # ⟨k−1, total−k+1| a b† |k, total−k⟩ = √k √(total−k+1)
            val = np.sqrt(k * (total - k + 1.0))
            g[i, i + 1] = val
            g[i + 1, i] = -val
        u[np.ix_(idx, idx)] = expm(theta * g)
    return u


def build_unitary(kind, params, cutoff=DEFAULT_CUTOFF):
    """Truncated Gaussian (or Kerr) unitary as a dense matrix.

    Single-mode kinds: 'displacement' (α), 'rotation' (θ), 'squeeze' (r),
    'kerr' (γ). Two-mode: 'two_mode_squeeze' (r), 'beamsplitter' (τ).
    """
    a = ladder(cutoff)
    n = np.arange(cutoff)
    if kind == "rotation":
        return np.diag(np.exp(-1j * float(params) * n))
    if kind == "kerr":
        return np.diag(np.exp(-1j * float(params) * n**2))
    if kind == "displacement":
        alpha = complex(params)
        return expm(alpha * a.conj().T - np.conj(alpha) * a)
    if kind == "squeeze":
        r = float(params)
        return expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
    if kind in ("two_mode_squeeze", "beamsplitter") and cutoff**2 > _MAX_DENSE_DIM:
        if kind == "beamsplitter":
            tau = float(params)
            if not 0.0 <= tau <= 1.0:
                raise ValueError(f"transmissivity must be in [0, 1], got {tau}")
            return _bs_sector_expm(np.arccos(np.sqrt(tau)), cutoff)
        raise ValueError(f"two-mode dense exponential too large at cutoff {cutoff}")
    if kind == "two_mode_squeeze":
        r = float(params)
        up = np.kron(a.conj().T, a.conj().T)
        return expm(r * (up - up.conj().T))
    if kind == "beamsplitter":
        tau = float(params)
        if not 0.0 <= tau <= 1.0:
            raise ValueError(f"transmissivity must be in [0, 1], got {tau}")
        theta = np.arccos(np.sqrt(tau))
        g = np.kron(a, a.conj().T)
        return expm(theta * (g - g.conj().T))
    raise ValueError(f"unknown unitary kind: {kind!r}")


def _contract_matrix(tensor, u, axes, cutoff):
    """Apply matrix u across the given tensor axes (in order)."""
    k = len(axes)
    ut = np.asarray(u).reshape((cutoff,) * (2 * k))
    out = np.tensordot(ut, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, range(k), axes)


def _infer_arity(u, cutoff):
    dim = u.shape[0]
    arity = max(1, round(np.log(dim) / np.log(cutoff)))
    if cutoff**arity != dim or u.shape != (dim, dim):
        raise ValueError(f"unitary shape {u.shape} incompatible with cutoff {cutoff}")
    return arity


def apply_unitary(state, u, targets=None):
    """Apply a (possibly multi-mode) unitary matrix to the targeted modes."""
    d = state.cutoff
    arity = _infer_arity(u, d)
    if targets is None:
        targets = tuple(range(arity))
    targets = tuple(int(t) for t in targets)
    if len(targets) != arity or any(t < 0 or t >= state.n_modes for t in targets):
        raise ValueError(f"bad targets {targets} for arity {arity}")
    if state.kind == "ket":
        out = _contract_matrix(state.data, u, targets, d)
        return FockArray(state.n_modes, d, "ket", out, trace_tol=state.trace_tol)
    t = _contract_matrix(state.tensor(), u, targets, d)
    bra_axes = tuple(state.n_modes + t_ for t_ in targets)
    t = _contract_matrix(t, np.conj(u), bra_axes, d)
    dim = d**state.n_modes
    return FockArray(
        state.n_modes, d, "density", t.reshape(dim, dim), trace_tol=state.trace_tol
    )


def _kraus_once(state, k_mat, targets, cutoff, n_out):
    """K·ψ for kets, K·ρ·K† (as raw tensor data) for densities."""
    if n_out != state.n_modes:  # register-consuming map, e.g. a projector
        if state.kind == "ket":
            return k_mat @ state.data.reshape(-1)
        return k_mat @ state.data @ k_mat.conj().T
    if state.kind == "ket":
        return _contract_matrix(state.data, k_mat, targets, cutoff)
    t = _contract_matrix(state.tensor(), k_mat, targets, cutoff)
    bra = tuple(state.n_modes + t_ for t_ in targets)
    return _contract_matrix(t, np.conj(k_mat), bra, cutoff)


def apply_map(state, cmap, targets=None, min_prob=1e-14, trace_tol=APPLY_DEFICIT_TOL):
    """Apply a ConditionalMap; returns (output FockArray, success probability).

    Post-selected maps (renormalize=True) return a unit-trace output and the
    branch probability; channels return their raw output and report its trace.

    :raises ZeroProbabilityError: post-selected branch weight ≤ min_prob.
    :raises TruncationError: a channel loses more than trace_tol of its trace.
    """
    d = state.cutoff
    if cmap.n_in != cmap.n_out:
        if targets not in (None, tuple(range(state.n_modes))):
            raise ValueError("mode-count-changing maps act on the full register")
        if state.n_modes != cmap.n_in:
            raise ValueError(
                f"map expects {cmap.n_in} modes, state has {state.n_modes}"
            )
        targets = tuple(range(cmap.n_in))
    elif targets is None:
        targets = tuple(range(cmap.n_in))
    else:
        targets = tuple(int(t) for t in targets)
    if len(targets) != cmap.n_in:
        raise ValueError(f"map acts on {cmap.n_in} modes, got targets {targets}")

    tag, payload = cmap.body
    n_out = state.n_modes if cmap.n_in == cmap.n_out else cmap.n_out
    out_tol = trace_tol + state.trace_deficit
    if tag == "unitary":
        out = apply_unitary(state, payload, targets)
        return out, 1.0

    if tag == "mixture":
        rho = state.to_density()
        acc = np.zeros_like(rho.data)
        for p, u in payload:
            acc = acc + p * apply_unitary(rho, u, targets).data
        return (
            FockArray(rho.n_modes, d, "density", acc, trace_tol=out_tol),
            float(np.trace(acc).real),
        )

    kraus = payload
    if state.kind == "ket" and len(kraus) == 1 and cmap.renormalize:
        out = _kraus_once(state, kraus[0], targets, d, n_out)
        prob = float(np.vdot(out, out).real)
        if prob <= min_prob:
            raise ZeroProbabilityError(f"post-selected branch has weight {prob:.3e}")
        out = out / np.sqrt(prob)
        return FockArray(n_out, d, "ket", out, trace_tol=out_tol), prob

    rho = state.to_density()
    dim_out = d**n_out
    acc = np.zeros((dim_out, dim_out), dtype=complex)
    for k_mat in kraus:
        term = _kraus_once(rho, k_mat, targets, d, n_out)
        acc = acc + term.reshape(dim_out, dim_out)
    prob = float(np.trace(acc).real)
    if cmap.renormalize:
        if prob <= min_prob:
            raise ZeroProbabilityError(f"post-selected branch has weight {prob:.3e}")
        acc = acc / prob
    elif 1.0 - prob > out_tol:
        raise TruncationError(
            f"channel output lost {1.0 - prob:.3e} of its trace",
            deficit=1.0 - prob,
            suggested_cutoff=2 * d,
        )
    return FockArray(n_out, d, "density", acc, trace_tol=out_tol), prob


def partial_trace(state, keep):
    """Reduced density matrix on the kept modes."""
    keep = tuple(int(k) for k in keep)
    n = state.n_modes
    if not keep or len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise ValueError(f"invalid mode subset {keep} for {n} modes")
    rho = state.to_density()
    t = rho.tensor()
    drop = [m for m in range(n) if m not in keep]
    for m in sorted(drop, reverse=True):
        t = np.trace(t, axis1=m, axis2=t.ndim // 2 + m)
    dim = state.cutoff ** len(keep)
    # surviving axes keep their relative order; reorder to the keep order
    order = np.argsort(np.argsort(keep))
    perm = list(order) + [len(keep) + o for o in order]
    t = t.transpose(perm) if list(perm) != list(range(t.ndim)) else t
    return FockArray(
        len(keep), state.cutoff, "density", t.reshape(dim, dim),
        trace_tol=state.trace_tol,
    )


def von_neumann_entropy(state, clamp=ENTROPY_CLAMP):
    """S(ρ) = −Σ λ log₂ λ; exactly 0 for kets."""
    if state.kind == "ket":
        return 0.0
    w = np.linalg.eigvalsh(state.data)
    if w.min() < -1e-9:
        raise InvalidStateError(f"density eigenvalue {w.min():.3e} < 0")
    w = w[w > clamp]
    return float(-(w @ np.log2(w)))


def relative_entropy(rho, sigma, support_tol=SUPPORT_TOL):
    """S(ρ‖σ) = Tr ρ(log₂ρ − log₂σ); +inf outside σ's support."""
    rho, sigma = rho.to_density(), sigma.to_density()
    if rho.data.shape != sigma.data.shape:
        raise ValueError("dimension mismatch")
    p, u = np.linalg.eigh(rho.data)
    q, v = np.linalg.eigh(sigma.data)
    if p.min() < -1e-9 or q.min() < -1e-9:
        raise InvalidStateError("negative density eigenvalues")
    p = np.clip(p, 0.0, None)
    overlap = np.abs(u.conj().T @ v) ** 2
    outside = q <= support_tol
    if float(p @ overlap[:, outside].sum(axis=1)) > 1e-9:
        return np.inf
    inside = ~outside
    plogp = float(p[p > ENTROPY_CLAMP] @ np.log2(p[p > ENTROPY_CLAMP]))
    cross = float(p @ (overlap[:, inside] @ np.log2(q[inside])))
    value = plogp - cross
    if value < -1e-9:
        raise InvalidStateError(f"relative entropy {value:.3e} < 0 beyond tolerance")
    return max(value, 0.0)


@dataclass(frozen=True)
class MomentRecord:
    """First and second ladder moments: first[j] = ⟨a_j⟩, aa[j,k] = ⟨a_j a_k⟩
    (diagonal ⟨a_j²⟩), adag_a[j,k] = ⟨a_j† a_k⟩."""

    n_modes: int
    first: np.ndarray
    aa: np.ndarray
    adag_a: np.ndarray

    def __post_init__(self):
        occ = np.diag(self.adag_a)
        if np.max(np.abs(occ.imag)) > 1e-9 or occ.real.min() < -1e-9:
            raise InvalidStateError("⟨a†a⟩ must be real and nonnegative")


def _ladder_ket(psi, mode, dagger=False):
    d = psi.shape[mode]
    root = np.sqrt(np.arange(1.0, d)).reshape((-1,) + (1,) * (psi.ndim - 1))
    src = np.moveaxis(psi, mode, 0)
    out = np.zeros_like(psi)
    dst = np.moveaxis(out, mode, 0)
    if dagger:
        dst[1:] = root * src[:-1]
    else:
        dst[:-1] = root * src[1:]
    return out


def _expect_dm(tensor, n_modes, ops):
    """Tr[ρ ⊗ O_k] with ops a dict mode → small matrix (identity if absent)."""
    letters = "abcdefghijkl"
    ket = letters[:n_modes]
    bra = letters[n_modes : 2 * n_modes]
    subs = [ket + bra]
    args = [tensor]
    out_pairs = []
    for m in range(n_modes):
        if m in ops:
            subs.append(bra[m] + ket[m])
            args.append(ops[m])
        else:
            out_pairs.append((m, m))
    # untouched modes contribute their trace: contract ket with bra letter
    spec = subs[0]
    for m, _ in out_pairs:
        spec = spec.replace(bra[m], ket[m])
    return complex(np.einsum(",".join([spec] + subs[1:]), *args))


def moments(state):
    """All first/second ladder moments, normalized by the state's weight."""
    n, d = state.n_modes, state.cutoff
    first = np.zeros(n, dtype=complex)
    aa = np.zeros((n, n), dtype=complex)
    adag_a = np.zeros((n, n), dtype=complex)
    if state.kind == "ket":
        psi = state.data
        norm_sq = float(np.vdot(psi, psi).real)
        lowered = [_ladder_ket(psi, j) for j in range(n)]
        for j in range(n):
            first[j] = np.vdot(psi, lowered[j])
            for k in range(j, n):
                aa[j, k] = aa[k, j] = np.vdot(psi, _ladder_ket(lowered[j], k))
            for k in range(n):
                adag_a[j, k] = np.vdot(lowered[j], lowered[k])
        first /= norm_sq
        aa /= norm_sq
        adag_a /= norm_sq
    else:
        t = state.tensor()
        a = ladder(d)
        trace = float(np.trace(state.data).real)
        for j in range(n):
            first[j] = _expect_dm(t, n, {j: a})
            aa[j, j] = _expect_dm(t, n, {j: a @ a})
            adag_a[j, j] = _expect_dm(t, n, {j: a.conj().T @ a})
            for k in range(j + 1, n):
                aa[j, k] = aa[k, j] = _expect_dm(t, n, {j: a, k: a})
                adag_a[j, k] = _expect_dm(t, n, {j: a.conj().T, k: a})
                adag_a[k, j] = np.conj(adag_a[j, k])
        first /= trace
        aa /= trace
        adag_a /= trace
    return MomentRecord(n, first, aa, adag_a)


def covariance_from_moments(m):
    """Gaussian state with the covariance/mean implied by ladder moments.

    Uses the quadrature identities q = a + a†, p = i(a† − a); each block is
    assembled from ⟨a⟩, ⟨a²⟩, ⟨a†a⟩ and, across modes, ⟨a_j a_k⟩, ⟨a_j† a_k⟩.
    """
    n = m.n_modes
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))
    for j in range(n):
        mean[2 * j] = 2.0 * m.first[j].real
        mean[2 * j + 1] = 2.0 * m.first[j].imag
    for j in range(n):
        sq = m.aa[j, j]
        occ = m.adag_a[j, j].real
        q, p = mean[2 * j], mean[2 * j + 1]
        cov[2 * j, 2 * j] = 2.0 * sq.real + 2.0 * occ + 1.0 - q * q
        cov[2 * j + 1, 2 * j + 1] = -2.0 * sq.real + 2.0 * occ + 1.0 - p * p
        cov[2 * j, 2 * j + 1] = cov[2 * j + 1, 2 * j] = 2.0 * sq.imag - q * p
    for j in range(n):
        for k in range(j + 1, n):
            ab = m.aa[j, k]
            adb = m.adag_a[j, k]
            qj, pj = mean[2 * j], mean[2 * j + 1]
            qk, pk = mean[2 * k], mean[2 * k + 1]
            block = np.array(
                [
                    [2.0 * (ab + adb).real - qj * qk, 2.0 * (adb + ab).imag - qj * pk],
                    [2.0 * (ab - adb).imag - pj * qk, 2.0 * (adb - ab).real - pj * pk],
                ]
            )
            cov[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = block
            cov[2 * k : 2 * k + 2, 2 * j : 2 * j + 2] = block.T
    return GaussianState(n, mean, cov)


def gaussify(state):
    """Resource-destroying map λ_G: the Gaussian state with ρ's mean and cov."""
    return covariance_from_moments(moments(state))


def _embedded_ladders(n_modes, cutoff):
    a = ladder(cutoff)
    eye = np.eye(cutoff, dtype=complex)
    out = []
    for k in range(n_modes):
        mats = [eye] * n_modes
        mats[k] = a
        out.append(reduce(np.kron, mats))
    return out


def _expm_passive(theta, cutoff):
    """exp(−i Σ θ_jk a_j†a_k) for 1 or 2 modes, per total-photon sector."""
    n = theta.shape[0]
    if n == 1:
        return np.diag(np.exp(-1j * theta[0, 0].real * np.arange(cutoff)))
    d = cutoff
    u = np.zeros((d * d, d * d), dtype=complex)
    for total in range(2 * d - 1):
        lo = max(0, total - d + 1)
        hi = min(total, d - 1)
        ks = np.arange(lo, hi + 1)
        idx = ks * d + (total - ks)
        m = len(ks)
        h = np.zeros((m, m), dtype=complex)
        for i, k in enumerate(ks):
            h[i, i] = theta[0, 0] * k + theta[1, 1] * (total - k)
            if i + 1 < m:
                # a_0† a_1 maps |k, total−k⟩ → √(k+1)√(total−k) |k+1, total−k−1⟩
                val = np.sqrt((k + 1.0) * (total - k))
                h[i + 1, i] += theta[0, 1] * val
                h[i, i + 1] += theta[1, 0] * val
        u[np.ix_(idx, idx)] = expm(-1j * h)
    return u


def symplectic_to_unitary(op, cutoff=DEFAULT_CUTOFF):
    """Fock unitary implementing a SymplecticOp, via its polar decomposition.

    S = O·P splits into a passive rotation block (photon-number preserving)
    and an active quadratic squeezer; the displacement is appended last.
    """
    n = op.n_modes
    dim = cutoff**n
    if dim > _MAX_DENSE_DIM:
        raise ValueError(f"dimension {dim} too large for a dense unitary")
    omega = symplectic_form(n)
    orth, pos = polar(op.S)

    u_active = None
    if np.max(np.abs(pos - np.eye(2 * n))) > 1e-12:
        K = -omega @ logm(pos)
        K = 0.5 * (K + K.T).real
        ladders = _embedded_ladders(n, cutoff)
        xs = []
        for a_k in ladders:
            xs.append(a_k + a_k.conj().T)
            xs.append(1j * (a_k.conj().T - a_k))
        h = np.zeros((dim, dim), dtype=complex)
        for i in range(2 * n):
            y = sum(K[i, j] * xs[j] for j in range(2 * n))
            h = h + xs[i] @ y
        u_active = expm(-0.25j * h)

    u_pass = orth[0::2, 0::2] + 1j * orth[1::2, 0::2]
    theta = 1j * logm(u_pass)
    theta = 0.5 * (theta + theta.conj().T)
    u = _expm_passive(theta, cutoff)
    if u_active is not None:
        u = u @ u_active

    if np.max(np.abs(op.delta_x)) > 0:
        disp = [
            build_unitary(
                "displacement",
                0.5 * (op.delta_x[2 * k] + 1j * op.delta_x[2 * k + 1]),
                cutoff,
            )
            for k in range(n)
        ]
        u = reduce(np.kron, disp) @ u
    return u


def gaussian_to_fock(gstate, cutoff=DEFAULT_CUTOFF, trace_tol=APPLY_DEFICIT_TOL):
    """Fock density matrix of a Gaussian state, via its Williamson form.

    Thermal product with the state's symplectic spectrum, rotated by the Fock
    unitary of the Williamson symplectic, then displaced to the state's mean.
    """
    n = gstate.n_modes
    mu, s_mat = williamson(gstate.cov)
    occ = np.maximum((mu - 1.0) / 2.0, 0.0)
    weights = []
    for N in occ:
        if N == 0.0:
            w = np.zeros(cutoff)
            w[0] = 1.0
        else:
            w = (N / (N + 1.0)) ** np.arange(cutoff) / (N + 1.0)
        weights.append(w)
    diag = reduce(np.kron, weights)
    deficit = 1.0 - float(diag.sum())
    if deficit > trace_tol:
        suggestion = None
        d = cutoff
        while d <= 65536:
            d *= 2
            tail = 1.0 - np.prod(
                [1.0 - (N / (N + 1.0)) ** d if N > 0 else 1.0 for N in occ]
            )
            if tail <= trace_tol:
                suggestion = d
                break
        raise TruncationError(
            f"thermal weights lose {deficit:.3e} at cutoff {cutoff}",
            deficit=deficit,
            suggested_cutoff=suggestion,
        )
    u = symplectic_to_unitary(SymplecticOp(n, s_mat, gstate.mean), cutoff)
    rho = (u * diag) @ u.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return FockArray(n, cutoff, "density", rho, trace_tol=trace_tol)


def delta_g(state):
    """Non-Gaussianity δ_G(ρ) = S(λ_G(ρ)) − S(ρ) in bits (clamped at 0)."""
    value = gaussian_entropy(gaussify(state)) - von_neumann_entropy(state)
    if value < -1e-6:
        raise TruncationError(
            f"negative non-Gaussianity {value:.3e}: moments corrupted by cutoff",
            deficit=-value,
        )
    return max(value, 0.0)


def delta_g_relent(state):
    """Diagnostic route δ_G(ρ) = S(ρ ‖ λ_G(ρ)).

    Uses the factored form of λ_G(ρ) from the Williamson route, so log σ is
    evaluated on the exact geometric spectrum; an eigensolver on the assembled
    σ would drown its tiny eigenvalues in floating-point noise.
    """
    d = state.cutoff
    g = gaussify(state)
    mu, s_mat = williamson(g.cov)
    occ = np.maximum((mu - 1.0) / 2.0, 0.0)
    weights = []
    for N in occ:
        if N == 0.0:
            w = np.zeros(d)
            w[0] = 1.0
        else:
            w = (N / (N + 1.0)) ** np.arange(d) / (N + 1.0)
        weights.append(w)
    q = reduce(np.kron, weights)
    u = symplectic_to_unitary(SymplecticOp(g.n_modes, s_mat, g.mean), d)
    rho = state.to_density()
    proj = np.einsum("ji,jk,ki->i", u.conj(), rho.data, u).real
    live = q > 0
    if float(proj[~live].sum()) > 1e-9:
        return np.inf
    cross = float(proj[live] @ np.log2(q[live]))
    return max(-von_neumann_entropy(state) - cross, 0.0)


def number_distribution(state, mode=0):
    """Photon-number probabilities of one mode (marginal for densities)."""
    if state.kind == "ket":
        psi = state.data
        axes = tuple(m for m in range(state.n_modes) if m != mode)
        p = np.abs(psi) ** 2
        return p.sum(axis=axes) if axes else p
    reduced = partial_trace(state, (mode,))
    return np.diag(reduced.data).real.copy()
