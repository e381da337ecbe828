"""Spin models: Hamiltonians, analytic eigen-systems, gauge-fixed derivatives.

Four parametrized models are supported, each driven by a single scalar
control parameter R through affine coupling maps:

  lz    one spin in a sweeping field, H = (Bz(R) sigma_z + Delta sigma_x)/2
  tfim  two-spin transverse Ising, H = J(R) s1z s2z - (s1x+s2x) Bx(R)/2
  qa    two-spin annealer, H = -J s1z s2z - (s1z+s2z) Bz/2 - (s1x+s2x) Bx(R)/2
  gen   Ising + general field, H = J s1z s2z + (s1 + s2).B/2, Bz = Bz(R)

Eigen-systems come from a dense Hermitian solver; the closed-form
eigenvalues (including the cubic roots of the two-spin models) are kept
alongside and cross-checked, with the cube-root branch selected to match
the numeric spectrum.  Eigenvector derivatives are central differences in
a gauge held fixed across the stencil.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    ConsistencyError,
    DegeneracyError,
    DomainError,
    GaugeError,
)

MODEL_KINDS = ("lz", "tfim", "qa", "gen")

# Couplings each Hamiltonian reads; any of them may be scheduled in R.
REQUIRED_COUPLINGS = {
    "lz": ("Bz", "Delta"),
    "tfim": ("J", "Bx"),
    "qa": ("J", "Bz", "Bx"),
    "gen": ("J", "Bx", "By", "Bz"),
}

GAP_MIN = 1e-8          # refuse gauge fixing below this eigenvalue gap
ANCHOR_MIN = 1e-6       # refuse derivatives when the gauge anchor is this small
DERIV_STEP = 3e-4       # base step factor for Richardson central differences
BRANCH_TOL = 1e-8       # analytic vs numeric eigenvalue guard
CUBIC_IMAG_TOL = 1e-10  # cubic roots must be real to this level


@dataclass(frozen=True)
class ModelSpec:
    """One of the four Hamiltonian models plus its coupling map.

    ``constants`` holds R-independent couplings; ``schedule_map`` maps a
    coupling name to ``(offset, slope)`` so that its value is
    ``offset + slope * R``.  A name present in both resolves through the
    schedule map.
    """

    kind: str
    constants: dict = field(default_factory=dict)
    schedule_map: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        for name in REQUIRED_COUPLINGS[self.kind]:
            if name not in self.schedule_map and name not in self.constants:
                raise ConfigError(f"model {self.kind!r} needs coupling {name!r}")
        for name, value in self.constants.items():
            if not np.isfinite(value):
                raise DomainError(f"constant {name!r} is not finite")
        for name, pair in self.schedule_map.items():
            offset, slope = pair
            if not (np.isfinite(offset) and np.isfinite(slope)):
                raise DomainError(f"schedule map for {name!r} is not finite")

    @property
    def dim(self):
        return 2 if self.kind == "lz" else 4

    @property
    def is_real(self):
        """True when the Hamiltonian matrix is real symmetric for all R."""
        return self.kind != "gen"

    def coupling(self, name, R):
        if name in self.schedule_map:
            offset, slope = self.schedule_map[name]
            return offset + slope * np.asarray(R, dtype=float)
        if name in self.constants:
            value = float(self.constants[name])
            return np.broadcast_to(value, np.shape(R)).copy() if np.ndim(R) else value
        raise ConfigError(f"model {self.kind!r} has no coupling {name!r}")

    def coupling_slope(self, name):
        """dc/dR for the named coupling (0 for constants)."""
        if name in self.schedule_map:
            return float(self.schedule_map[name][1])
        if name in self.constants:
            return 0.0
        raise ConfigError(f"model {self.kind!r} has no coupling {name!r}")

    def couplings(self, R):
        return {name: self.coupling(name, R) for name in REQUIRED_COUPLINGS[self.kind]}

    # -- canonical parametrizations ------------------------------------

    @classmethod
    def lz(cls, delta=1.0, sweep=(0.0, 1.0)):
        return cls("lz", constants={"Delta": delta}, schedule_map={"Bz": tuple(sweep)})

    @classmethod
    def tfim(cls, j=(1.0, 0.0), bx=(1.0, 0.0)):
        """Transverse Ising with user-affine J(R) and Bx(R)."""
        return cls("tfim", schedule_map={"J": tuple(j), "Bx": tuple(bx)})

    @classmethod
    def qa(cls, j=1.0, bz=0.1, b0=10.0):
        """Annealing model with Bx = b0 - R."""
        return cls("qa", constants={"J": j, "Bz": bz}, schedule_map={"Bx": (b0, -1.0)})

    @classmethod
    def gen(cls, j=8.0, bx=1.0, by=1.0, b0=25.0):
        """Entanglement-generation model with Bz = b0 - R."""
        return cls(
            "gen",
            constants={"J": j, "Bx": bx, "By": by},
            schedule_map={"Bz": (b0, -1.0)},
        )


@dataclass(frozen=True)
class EigenState:
    """One gauge-fixed instantaneous eigenpair."""

    n: int
    energy: float
    amplitudes: np.ndarray
    gauge: str          # "real_positive" or "fixed_component_phase"
    anchor: int


def hamiltonian(model, R):
    """Hermitian model matrix at parameter R (scalar or array of R values).

    Returns shape ``(dim, dim)`` for scalar R, ``R.shape + (dim, dim)``
    otherwise.  Entries follow the usual two-spin basis ordering
    |uu>, |ud>, |du>, |dd>.
    """
    R = np.asarray(R, dtype=float)
    if not np.all(np.isfinite(R)):
        raise DomainError("R is not finite")
    c = model.couplings(R)
    for name, value in c.items():
        if not np.all(np.isfinite(value)):
            raise DomainError(f"coupling {name!r} is not finite at R={R}")
    shape = R.shape
    d = model.dim
    H = np.zeros(shape + (d, d), dtype=complex)
    if model.kind == "lz":
        Bz, Delta = c["Bz"], c["Delta"]
        H[..., 0, 0] = 0.5 * Bz
        H[..., 1, 1] = -0.5 * Bz
        H[..., 0, 1] = 0.5 * Delta
        H[..., 1, 0] = 0.5 * Delta
    elif model.kind == "tfim":
        J, Bx = c["J"], c["Bx"]
        H[..., 0, 0] = H[..., 3, 3] = J
        H[..., 1, 1] = H[..., 2, 2] = -J
        for i, j in ((0, 1), (0, 2), (1, 3), (2, 3)):
            H[..., i, j] = H[..., j, i] = -0.5 * Bx
    elif model.kind == "qa":
        J, Bz, Bx = c["J"], c["Bz"], c["Bx"]
        H[..., 0, 0] = -J - Bz
        H[..., 1, 1] = H[..., 2, 2] = J
        H[..., 3, 3] = -J + Bz
        for i, j in ((0, 1), (0, 2), (1, 3), (2, 3)):
            H[..., i, j] = H[..., j, i] = -0.5 * Bx
    else:  # gen
        J, Bx, By, Bz = c["J"], c["Bx"], c["By"], c["Bz"]
        z = 0.5 * (Bx - 1j * By)
        H[..., 0, 0] = J + Bz
        H[..., 1, 1] = H[..., 2, 2] = -J
        H[..., 3, 3] = J - Bz
        for i, j in ((0, 1), (0, 2), (1, 3), (2, 3)):
            H[..., i, j] = z
            H[..., j, i] = np.conj(z)
    return H


def _eigh_model(model, R):
    """Batched dense eigensolve; real path for the real-symmetric models."""
    H = hamiltonian(model, R)
    if model.is_real:
        w, V = np.linalg.eigh(H.real)
        return w, V.astype(complex)
    return np.linalg.eigh(H)


def _fix_phase(vectors, anchors):
    """Rotate each vector so its anchor component is real nonnegative.

    vectors: (..., d) with anchors broadcastable integer indices.
    """
    idx = np.arange(vectors.shape[0])
    pivot = vectors[idx, anchors]
    mag = np.abs(pivot)
    # Zero anchors leave the phase untouched; callers guard against this.
    unit = np.where(mag > 0, pivot / np.where(mag > 0, mag, 1.0), 1.0)
    return vectors * np.conj(unit)[:, None]


def default_anchor(model, amplitudes):
    """Gauge anchor: largest component, except gen pins the last component."""
    if model.kind == "gen" and abs(amplitudes[-1]) >= ANCHOR_MIN:
        return model.dim - 1
    return int(np.argmax(np.abs(amplitudes)))


def eigensystem(model, R, *, check=True, gap_min=GAP_MIN, n=None):
    """All instantaneous eigenpairs at R, sorted by energy and gauge-fixed.

    With ``check`` the closed-form eigenvalues are recomputed and compared
    against the numeric spectrum (cube-root branch included).  ``n``
    restricts the degeneracy guard to the tracked state; without it no
    gap check is performed (crossings between untracked states are fine).
    """
    R = float(R)
    w, V = _eigh_model(model, np.array([R]))
    w, V = w[0], V[0]
    if check:
        analytic_eigenvalues(model, R, numeric=w)
    if n is not None:
        gaps = [abs(w[m] - w[n]) for m in range(model.dim) if m != n]
        if min(gaps) < gap_min:
            raise DegeneracyError(
                f"eigenvalue gap {min(gaps):.3e} around state {n} at R={R} "
                f"is below gap_min={gap_min:.1e}"
            )
    states = []
    gauge = "real_positive" if model.is_real else "fixed_component_phase"
    for m in range(model.dim):
        vec = V[:, m]
        anchor = default_anchor(model, vec)
        vec = _fix_phase(vec[None, :], np.array([anchor]))[0]
        if model.is_real:
            vec = vec.real.astype(complex)
        states.append(EigenState(m, float(w[m]), vec, gauge, anchor))
    return states


def _cubic_candidates(model, R):
    """The three branch candidates for the symmetric-sector cubic roots."""
    c = model.couplings(R)
    J = c["J"]
    if model.kind == "qa":
        Bx, Bz = c["Bx"], c["Bz"]
        gp = Bx**2 / 3 + Bz**2 / 3 + 4 * J**2 / 9
        gm = Bx**2 * J / 3 - 2 * Bz**2 * J / 3 + 8 * J**3 / 27
        base = -J / 3
    else:  # gen
        Bz = c["Bz"]
        z2 = (c["Bx"] ** 2 + c["By"] ** 2) / 4
        gp = Bz**2 / 3 + 4 * z2 / 3 + 4 * J**2 / 9
        gm = 2 * Bz**2 * J / 3 - 4 * J * z2 / 3 - 8 * J**3 / 27
        base = J / 3
    u = gm + np.sqrt(complex(gm**2 - gp**3))
    r = abs(u) ** (1.0 / 3.0)
    theta = np.angle(u)
    out = []
    for k in range(3):
        beta = r * np.exp(1j * (theta + 2 * np.pi * k) / 3)
        pair_sum = beta + np.conj(beta)
        lam2 = base + pair_sum
        # the conjugate pair splits symmetrically around base - pair_sum/2
        split = np.sqrt(3.0) * (1j * (np.conj(beta) - beta))
        lam3 = base - 0.5 * pair_sum - 0.5 * split
        lam4 = base - 0.5 * pair_sum + 0.5 * split
        out.append((lam2, lam3, lam4))
    return out


def analytic_eigenvalues(model, R, *, numeric=None):
    """Closed-form eigenvalues, sorted ascending, branch-matched to numeric.

    Raises ConsistencyError when no cube-root branch reproduces the dense
    solver's spectrum, or when a cubic root picks up an imaginary part.
    """
    c = model.couplings(R)
    if model.kind == "lz":
        Q = np.hypot(c["Bz"], c["Delta"])
        vals = np.array([-Q / 2, Q / 2])
    elif model.kind == "tfim":
        J, Bx = c["J"], c["Bx"]
        s = np.hypot(J, Bx)
        vals = np.sort(np.array([-J, J, -s, s]))
    else:
        if numeric is None:
            numeric, _ = _eigh_model(model, np.array([float(R)]))
            numeric = numeric[0]
        asym = c["J"] if model.kind == "qa" else -c["J"]
        scale = max(1.0, float(np.max(np.abs(numeric))))
        best, best_err = None, np.inf
        for lam2, lam3, lam4 in _cubic_candidates(model, R):
            roots = np.array([lam2, lam3, lam4])
            if np.max(np.abs(roots.imag)) > CUBIC_IMAG_TOL * scale:
                continue
            vals_k = np.sort(np.concatenate([[asym], roots.real]))
            err = np.max(np.abs(vals_k - np.sort(numeric))) / scale
            if err < best_err:
                best, best_err = vals_k, err
        if best is None or best_err > BRANCH_TOL:
            raise ConsistencyError(
                f"cube-root branch mismatch for {model.kind} at R={R}: "
                f"best relative error {best_err:.3e}"
            )
        return best
    if numeric is not None:
        scale = max(1.0, float(np.max(np.abs(numeric))))
        err = np.max(np.abs(vals - np.sort(numeric))) / scale
        if err > BRANCH_TOL:
            raise ConsistencyError(
                f"analytic/numeric eigenvalue mismatch for {model.kind} "
                f"at R={R}: {err:.3e}"
            )
    return vals


def _stencil(model, R, n, h=None, *, anchor=None, richardson=True, gap_min=GAP_MIN):
    """Gauge-consistent eigenvector stencil for state n around scalar R."""
    R = float(R)
    if h is None:
        h = DERIV_STEP * max(1.0, abs(R))
    offsets = [0.0, h, -h] + ([h / 2, -h / 2] if richardson else [])
    w, V = _eigh_model(model, np.array([R + s for s in offsets]))
    gaps = [abs(w[0, m] - w[0, n]) for m in range(model.dim) if m != n]
    if min(gaps) < gap_min:
        raise DegeneracyError(
            f"eigenvalue gap {min(gaps):.3e} around state {n} at R={R} "
            f"is below gap_min={gap_min:.1e}"
        )
    vecs = V[:, :, n]
    if anchor is None:
        anchor = default_anchor(model, vecs[0])
    small = np.abs(vecs[:, anchor]).min()
    if small < ANCHOR_MIN:
        raise GaugeError(
            f"gauge anchor component {anchor} has magnitude {small:.3e} "
            f"inside the stencil at R={R}; switch anchor"
        )
    vecs = _fix_phase(vecs, np.full(len(offsets), anchor))
    if model.is_real:
        vecs = vecs.real.astype(complex)
    return w[0], vecs, h


def eigenvector_derivative(model, R, n, h=None, *, anchor=None, richardson=True,
                           gap_min=GAP_MIN):
    """d/dR of the gauge-fixed eigenvector of state n.

    Central differences with the gauge anchored on the center point's
    convention at every stencil point.  ``richardson`` adds an h/2 stencil
    and extrapolates the O(h^2) truncation away; disable it to get the
    plain two-point formula.
    """
    _, vecs, h = _stencil(model, R, n, h, anchor=anchor, richardson=richardson,
                          gap_min=gap_min)
    d1 = (vecs[1] - vecs[2]) / (2 * h)
    if not richardson:
        return d1
    d2 = (vecs[3] - vecs[4]) / h
    return (4.0 * d2 - d1) / 3.0


def state_and_derivative(model, R, n, **kw):
    """(C, dC/dR) for state n in one consistent gauge."""
    _, vecs, h = _stencil(model, R, n, kw.pop("h", None), **kw)
    d1 = (vecs[1] - vecs[2]) / (2 * h)
    if vecs.shape[0] == 5:
        d1 = (4.0 * ((vecs[3] - vecs[4]) / h) - d1) / 3.0
    return vecs[0], d1


PHASE_IMAG_TOL = 1e-10


def adiabatic_phase_rate(model, R, n, **kw):
    """d(xi)/dR = i <C|dC/dR>, a real number; zero for real eigenvectors.

    The real part of <C|dC/dR> must vanish by normalization; a residue
    above tolerance signals a broken gauge.
    """
    C, dC = state_and_derivative(model, R, n, **kw)
    overlap = np.vdot(C, dC)
    value = 1j * overlap
    if abs(value.imag) > PHASE_IMAG_TOL:
        raise GaugeError(
            f"adiabatic phase rate has imaginary residue {value.imag:.3e} "
            f"at R={R} (state {n})"
        )
    return float(value.real)


# ---------------------------------------------------------------------------
# batched pipeline used by the solver and propagator

def eigensystem_batch(model, R_array):
    """Energies and gauge-fixed eigenvectors over an array of R values.

    Returns (w, V) with shapes (N, dim) and (N, dim, dim); V[:, :, m] is
    state m, each vector phase-anchored at its largest component.
    """
    R_array = np.asarray(R_array, dtype=float)
    w, V = _eigh_model(model, R_array)
    for m in range(model.dim):
        g = V[:, :, m]
        anchors = np.argmax(np.abs(g), axis=1)
        V[:, :, m] = _fix_phase(g, anchors)
    return w, V


def state_and_derivative_batch(model, R_array, n, h_factor=DERIV_STEP,
                               richardson=True):
    """Vectorized (C, dC/dR, E, all_energies) for state n over R_array.

    Anchors come from each center point (largest component), which keeps
    every stencil internally gauge-consistent; downstream consumers of
    (C, dC) pairs are gauge-invariant.
    """
    R = np.asarray(R_array, dtype=float)
    N = R.size
    h = h_factor * np.maximum(1.0, np.abs(R))
    offsets = [np.zeros(N), h, -h] + ([h / 2, -h / 2] if richardson else [])
    S = len(offsets)
    w, V = _eigh_model(model, np.concatenate([R + s for s in offsets]))
    vecs = V[:, :, n].reshape(S, N, -1)
    anchors = np.argmax(np.abs(vecs[0]), axis=1)
    flat = vecs.reshape(S * N, -1)
    flat = _fix_phase(flat, np.tile(anchors, S))
    vecs = flat.reshape(S, N, -1)
    if model.is_real:
        vecs = vecs.real.astype(complex)
    d1 = (vecs[1] - vecs[2]) / (2 * h)[:, None]
    dC = d1 if not richardson else (4.0 * ((vecs[3] - vecs[4]) / h[:, None]) - d1) / 3.0
    energies = w[:N]
    return vecs[0], dC, energies[:, n], energies
