"""Meromorphic potentials lambda^{-1} [[0, f], [E/f, 0]] dz and domain maps.

Descriptors are kept exact: f and E are rational functions (complex
coefficient lists) or pure exponentials c * exp(k z).  The exponential kind
exists so that pulling a branched potential back through the covering
w -> exp(w) + z0 stays inside the descriptor class.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, UnsupportedMap

_ROOT_TOL = 1e-8
_COEFF_TOL = 1e-10


# ---------------------------------------------------------------------------
# polynomial helpers (coefficients ascending, numpy complex arrays)
# ---------------------------------------------------------------------------

def _aspoly(c) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(c, dtype=complex))
    return _trim(arr)


def _trim(p: np.ndarray) -> np.ndarray:
    mask = np.abs(p) > 0
    if not mask.any():
        return np.zeros(1, dtype=complex)
    return p[:int(np.max(np.nonzero(mask)[0])) + 1]


def _polyval(p: np.ndarray, z):
    return np.polynomial.polynomial.polyval(z, p)


def _polymul(p, q):
    return _trim(np.convolve(p, q))


def _compose_affine(p: np.ndarray, a: complex, b: complex) -> np.ndarray:
    """Coefficients of p(a w + b)."""
    out = np.zeros(1, dtype=complex)
    for coeff in p[::-1]:
        out = _polymul(out, np.array([b, a]))
        out = np.polynomial.polynomial.polyadd(out, [coeff])
    return _trim(out)


def _compose_homogeneous(p: np.ndarray, num, den, total: int) -> np.ndarray:
    """Coefficients of (den)^total * p(num / den) for total >= deg p."""
    out = np.zeros(1, dtype=complex)
    num = _aspoly(num)
    den = _aspoly(den)
    npow = np.zeros(1, dtype=complex) + 1.0
    dpows = [np.ones(1, dtype=complex)]
    for _ in range(total):
        dpows.append(_polymul(dpows[-1], den))
    for i, coeff in enumerate(p):
        if i > total:
            break
        term = _polymul(npow, dpows[total - i]) * coeff
        out = np.polynomial.polynomial.polyadd(out, term)
        npow = _polymul(npow, num)
    return _trim(out)


def _roots_polished(p: np.ndarray) -> np.ndarray:
    p = _trim(p)
    if len(p) <= 1:
        return np.zeros(0, dtype=complex)
    roots = np.roots(p[::-1])
    dp = np.polynomial.polynomial.polyder(p)
    for _ in range(2):  # Newton polish on the companion-matrix roots
        val = _polyval(p, roots)
        dval = _polyval(dp, roots)
        safe = np.abs(dval) > 1e-14
        roots = np.where(safe, roots - val / np.where(safe, dval, 1.0), roots)
    return roots


def _cluster_roots(roots: np.ndarray, tol: float = _ROOT_TOL):
    """Group numerically coincident roots; returns [(center, multiplicity)]."""
    remaining = list(roots)
    clusters = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        rest = []
        for r in remaining:
            if abs(r - seed) < tol * max(1.0, abs(seed)):
                members.append(r)
            else:
                rest.append(r)
        remaining = rest
        clusters.append((complex(np.mean(members)), len(members)))
    return clusters


# ---------------------------------------------------------------------------
# scalar function descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalFunction:
    """num / den with ascending complex coefficient arrays."""

    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))

    def __post_init__(self):
        num = _aspoly(self.num)
        den = _aspoly(self.den)
        if np.all(den == 0):
            raise InvalidParameter("rational function with zero denominator")
        num.flags.writeable = False
        den.flags.writeable = False
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __call__(self, z):
        return _polyval(self.num, z) / _polyval(self.den, z)

    @property
    def is_polynomial(self) -> bool:
        return len(self.den) == 1

    @property
    def is_zero(self) -> bool:
        return len(self.num) == 1 and self.num[0] == 0

    def scaled(self, c: complex) -> "RationalFunction":
        return RationalFunction(self.num * c, self.den.copy())


@dataclass(frozen=True)
class ExpFunction:
    """coef * exp(rate * z); closed under affine pullback."""

    coef: complex
    rate: complex

    def __call__(self, z):
        return self.coef * np.exp(self.rate * np.asarray(z, dtype=complex))

    @property
    def is_zero(self) -> bool:
        return self.coef == 0


def _descriptor_close(a, b, tol=_COEFF_TOL) -> float:
    """Coefficient-level distance of two descriptors (inf if kinds differ)."""
    if isinstance(a, ExpFunction) and isinstance(b, ExpFunction):
        return max(abs(a.coef - b.coef), abs(a.rate - b.rate))
    if isinstance(a, RationalFunction) and isinstance(b, RationalFunction):
        # cross-multiplied comparison; exact for identical denominators
        lhs = _polymul(a.num, b.den)
        rhs = _polymul(b.num, a.den)
        n = max(len(lhs), len(rhs))
        lhs = np.pad(lhs, (0, n - len(lhs)))
        rhs = np.pad(rhs, (0, n - len(rhs)))
        scale = max(1.0, float(np.max(np.abs(rhs))))
        return float(np.max(np.abs(lhs - rhs))) / scale
    return float("inf")


# ---------------------------------------------------------------------------
# domain automorphisms and the exponential covering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainAutomorphism:
    """Affine map z -> a z + b of the plane, or a unit-disk Moebius map."""

    kind: str
    a: complex = 1.0
    b: complex = 0.0
    matrix: np.ndarray | None = None
    domain: str = "plane"

    def __post_init__(self):
        if self.kind == "affine":
            if self.a == 0:
                raise InvalidParameter("affine map needs a != 0")
        elif self.kind == "moebius":
            m = np.asarray(self.matrix, dtype=complex).reshape(2, 2)
            if abs(np.linalg.det(m) - 1.0) > 1e-9:
                raise InvalidParameter("Moebius matrix must have determinant 1")
            # disk preservation: su(1,1) shape [[a, b], [conj b, conj a]]
            if (abs(m[1, 0] - np.conj(m[0, 1])) > 1e-9
                    or abs(m[1, 1] - np.conj(m[0, 0])) > 1e-9):
                raise InvalidParameter("Moebius matrix does not preserve the disk")
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)
            object.__setattr__(self, "domain", "disk")
        else:
            raise InvalidParameter(f"unknown automorphism kind {self.kind!r}")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "affine":
            return self.a * z + self.b
        m = self.matrix
        return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "affine":
            return np.broadcast_to(np.asarray(self.a, dtype=complex), z.shape).copy() \
            if z.shape else complex(self.a)
        m = self.matrix
        return 1.0 / (m[1, 0] * z + m[1, 1]) ** 2

    def compose(self, inner: "DomainAutomorphism") -> "DomainAutomorphism":
        """self after inner: z -> self(inner(z))."""
        if self.kind == "affine" and inner.kind == "affine":
            return DomainAutomorphism(
                "affine", a=self.a * inner.a, b=self.a * inner.b + self.b
            )
        return DomainAutomorphism(
            "moebius", matrix=self._as_matrix() @ inner._as_matrix()
        )

    def inverse(self) -> "DomainAutomorphism":
        if self.kind == "affine":
            return DomainAutomorphism("affine", a=1.0 / self.a, b=-self.b / self.a)
        m = self.matrix
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex)
        return DomainAutomorphism("moebius", matrix=inv)

    def _as_matrix(self) -> np.ndarray:
        if self.kind == "moebius":
            return self.matrix
        s = 1.0 / np.sqrt(complex(self.a))
        return np.array([[self.a * s, self.b * s], [0.0, s]], dtype=complex)

    @property
    def is_identity(self) -> bool:
        return self.kind == "affine" and self.a == 1.0 and self.b == 0.0


def rotation(angle: float, center: complex = 0.0) -> DomainAutomorphism:
    a = complex(np.exp(1j * angle))
    return DomainAutomorphism("affine", a=a, b=center * (1.0 - a))


def translation(offset: complex) -> DomainAutomorphism:
    return DomainAutomorphism("affine", a=1.0, b=offset)


@dataclass(frozen=True)
class ExpCovering:
    """Covering map w -> exp(w) + z0 of the punctured plane around z0."""

    z0: complex

    def __call__(self, w):
        return np.exp(np.asarray(w, dtype=complex)) + self.z0

    def derivative(self, w):
        return np.exp(np.asarray(w, dtype=complex))


# ---------------------------------------------------------------------------
# the potential
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeromorphicPotential:
    """Data (f, E) of the one-form lambda^{-1} [[0, f], [E/f, 0]] dz."""

    f: RationalFunction | ExpFunction
    hopf: RationalFunction | ExpFunction
    poles: tuple = ()
    lower: RationalFunction | ExpFunction | None = None

    def upper_values(self, z):
        """f(z); the upper-right matrix entry without the lambda factor."""
        return self.f(z)

    def lower_values(self, z):
        """(E/f)(z), using the cancelled form where it exists."""
        return self.lower(z)

    def eval_matrix(self, z, lam) -> np.ndarray:
        out = np.zeros(np.shape(z) + (2, 2), dtype=complex) if np.shape(z) \
            else np.zeros((2, 2), dtype=complex)
        out[..., 0, 1] = self.upper_values(z)
        out[..., 1, 0] = self.lower_values(z)
        return out / lam


def _quotient(hopf, f):
    """E / f in simplified form when the division is exact."""
    if isinstance(f, ExpFunction) or isinstance(hopf, ExpFunction):
        if isinstance(f, ExpFunction) and isinstance(hopf, ExpFunction):
            return ExpFunction(hopf.coef / f.coef, hopf.rate - f.rate)
        raise UnsupportedMap("mixed exponential/rational potential data")
    num = _polymul(hopf.num, f.den)
    den = _polymul(hopf.den, f.num)
    if len(den) == 1:
        return RationalFunction(num / den[0])
    quot, rem = np.polynomial.polynomial.polydiv(num, den)
    if np.max(np.abs(rem)) <= 1e-13 * max(1.0, float(np.max(np.abs(num)))):
        return RationalFunction(_trim(quot))
    return RationalFunction(num, den)


def _pole_set(f, hopf) -> tuple:
    if isinstance(f, ExpFunction) or isinstance(hopf, ExpFunction):
        return ()
    poles = {}

    def add(w):
        for seen in poles:
            if abs(w - seen) < _ROOT_TOL * max(1.0, abs(seen)):
                return
        poles[w] = True

    for w, _ in _cluster_roots(_roots_polished(f.den)):
        add(w)
    for w, _ in _cluster_roots(_roots_polished(hopf.den)):
        add(w)
    hopf_zeros = dict(_cluster_roots(_roots_polished(hopf.num)))
    for w, mult in _cluster_roots(_roots_polished(f.num)):
        hopf_mult = 0
        for hw, hm in hopf_zeros.items():
            if abs(hw - w) < _ROOT_TOL * max(1.0, abs(w)):
                hopf_mult = hm
        if mult > hopf_mult:
            add(w)
    return tuple(poles)


def _is_square_divisor(f) -> bool:
    if isinstance(f, ExpFunction):
        return True  # exp has no zeros or poles
    for poly in (f.num, f.den):
        for _, mult in _cluster_roots(_roots_polished(poly)):
            if mult % 2:
                return False
    return True


def meromorphic_potential(f, hopf) -> MeromorphicPotential:
    """Assemble a potential from descriptors, computing poles and E/f."""
    if f.is_zero:
        raise InvalidParameter("f must not be identically zero")
    if not _is_square_divisor(f):
        warnings.warn(
            "f is not the square of a meromorphic function; the synthesized "
            "surface will carry branch points",
            RuntimeWarning,
            stacklevel=2,
        )
    return MeromorphicPotential(
        f=f, hopf=hopf, poles=_pole_set(f, hopf), lower=_quotient(hopf, f)
    )


def cylinder_potential() -> MeromorphicPotential:
    """f = E = 1; integrates to the standard round cylinder."""
    one = RationalFunction(np.ones(1, dtype=complex))
    return meromorphic_potential(one, one)


def smyth_potential(m: int, c: complex) -> MeromorphicPotential:
    """f = 1, E = c z^m; rotationally symmetric metric, umbilic of order m."""
    if c == 0:
        raise InvalidParameter("smyth potential requires c != 0")
    if m < 0 or int(m) != m:
        raise InvalidParameter("smyth potential requires integer m >= 0")
    e = np.zeros(m + 1, dtype=complex)
    e[m] = c
    return meromorphic_potential(
        RationalFunction(np.ones(1, dtype=complex)), RationalFunction(e)
    )


def branched_potential(z0: complex) -> MeromorphicPotential:
    """f = E = z - z0; holomorphic, with a branch point at z0."""
    if z0 == 0:
        raise InvalidParameter("branched potential requires z0 != 0")
    lin = np.array([-z0, 1.0], dtype=complex)
    return meromorphic_potential(RationalFunction(lin), RationalFunction(lin.copy()))


# ---------------------------------------------------------------------------
# pullback and symmetry checks on descriptors
# ---------------------------------------------------------------------------

def _pullback_scalar(desc, h, weight: int):
    """(desc o h) * h'^weight at descriptor level."""
    if isinstance(h, DomainAutomorphism) and h.kind == "affine":
        a, b = h.a, h.b
        if isinstance(desc, ExpFunction):
            return ExpFunction(desc.coef * np.exp(desc.rate * b) * a ** weight,
                               desc.rate * a)
        num = _compose_affine(desc.num, a, b) * a ** weight
        den = _compose_affine(desc.den, a, b)
        return RationalFunction(num, den)
    if isinstance(h, DomainAutomorphism) and h.kind == "moebius":
        if isinstance(desc, ExpFunction):
            raise UnsupportedMap("exponential data under a Moebius map")
        m = h.matrix
        gnum = np.array([m[0, 1], m[0, 0]])
        gden = np.array([m[1, 1], m[1, 0]])
        total = max(len(desc.num), len(desc.den)) - 1
        num = _compose_homogeneous(desc.num, gnum, gden, total)
        den = _compose_homogeneous(desc.den, gnum, gden, total)
        # h' = 1 / (c z + d)^2 since det = 1
        den = _polymul(den, _polymul(gden, gden) if weight == 1 else
                       _polymul(_polymul(gden, gden), _polymul(gden, gden)))
        return RationalFunction(num, den)
    if isinstance(h, ExpCovering):
        if isinstance(desc, ExpFunction):
            raise UnsupportedMap("exponential data under the exponential covering")
        if not desc.is_polynomial:
            raise UnsupportedMap("exponential covering needs polynomial data")
        shifted = _compose_affine(desc.num, 1.0, h.z0)  # coefficients in (z - z0)
        nonzero = np.nonzero(np.abs(shifted) > _COEFF_TOL * max(1.0, np.max(np.abs(shifted))))[0]
        if len(nonzero) != 1:
            raise UnsupportedMap(
                "exponential covering supports monomials in (z - z0) only"
            )
        power = int(nonzero[0])
        return ExpFunction(shifted[power], power + weight)
    raise UnsupportedMap(f"unsupported map {h!r}")


def pullback(pot: MeromorphicPotential, h) -> MeromorphicPotential:
    """Transform the potential by z = h(w): f -> (f o h) h', E -> (E o h) h'^2."""
    if isinstance(h, DomainAutomorphism) and h.is_identity:
        return meromorphic_potential(pot.f, pot.hopf)
    new_f = _pullback_scalar(pot.f, h, 1)
    new_e = _pullback_scalar(pot.hopf, h, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return meromorphic_potential(new_f, new_e)


def _halton(n: int, base: int) -> np.ndarray:
    out = np.zeros(n)
    for i in range(n):
        frac, denom, k = 0.0, 1.0, i + 1
        while k > 0:
            denom *= base
            k, digit = divmod(k, base)
            frac += digit / denom
        out[i] = frac
    return out


def _disk_samples(count: int = 64, radius: float = 0.9) -> np.ndarray:
    u = _halton(count, 2)
    v = _halton(count, 3)
    return radius * np.sqrt(u) * np.exp(2j * np.pi * v)


def check_E_automorphy(pot: MeromorphicPotential, g: DomainAutomorphism,
                       tol: float = 1e-8):
    """Does (E o g) (g')^2 = E hold?  Returns (bool, residual).

    Exact coefficient comparison for affine g on rational data; a sampled
    check at 64 Halton points in the disk otherwise.
    """
    pulled = _pullback_scalar(pot.hopf, g, 2)
    if g.kind == "affine" and not isinstance(pot.hopf, ExpFunction):
        residual = _descriptor_close(pulled, pot.hopf)
    elif isinstance(pot.hopf, ExpFunction):
        residual = _descriptor_close(pulled, pot.hopf)
    else:
        zs = _disk_samples()
        vals = pot.hopf(g(zs)) * g.derivative(zs) ** 2 - pot.hopf(zs)
        scale = max(1.0, float(np.max(np.abs(pot.hopf(zs)))))
        residual = float(np.max(np.abs(vals))) / scale
    return bool(residual <= tol), float(residual)


@dataclass(frozen=True)
class RotationSymmetry:
    """A cyclic rotation family fixing the Hopf data."""

    center: complex | None
    order: int
    constant_hopf: bool = False

    @property
    def note(self) -> str:
        return "constant-E: translation-invariant" if self.constant_hopf else ""


def classify_rotation_symmetries(pot: MeromorphicPotential):
    """Detect E = d (z - z0)^m and report the order m+2 rotation family.

    Constant E reports the order-2 family about arbitrary centers (plus
    translation invariance); anything that is not a shifted monomial gives
    an empty list.
    """
    hopf = pot.hopf
    if isinstance(hopf, ExpFunction) or not hopf.is_polynomial:
        return []
    poly = hopf.num
    if len(poly) == 1:
        if poly[0] == 0:
            return []
        return [RotationSymmetry(center=None, order=2, constant_hopf=True)]
    clusters = _cluster_roots(_roots_polished(poly), tol=1e-6)
    if len(clusters) != 1:
        return []
    center, mult = clusters[0]
    return [RotationSymmetry(center=center, order=mult + 2)]


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

def _c(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    return complex(pair[0], pair[1])


def _pair(z: complex):
    return [float(np.real(z)), float(np.imag(z))]


def potential_from_config(cfg: dict) -> MeromorphicPotential:
    """Build a potential from its JSON configuration dictionary."""
    kind = cfg.get("type")
    if kind == "cylinder":
        return cylinder_potential()
    if kind == "smyth":
        return smyth_potential(int(cfg["m"]), _c(cfg["c"]))
    if kind == "branched":
        return branched_potential(_c(cfg["z0"]))
    if kind == "custom":
        f = RationalFunction(
            np.array([_c(p) for p in cfg["f_num"]]),
            np.array([_c(p) for p in cfg.get("f_den", [[1, 0]])]),
        )
        hopf = RationalFunction(np.array([_c(p) for p in cfg["E"]]))
        return meromorphic_potential(f, hopf)
    raise InvalidParameter(f"unknown potential type {kind!r}")


def potential_to_config(pot: MeromorphicPotential) -> dict:
    if isinstance(pot.f, ExpFunction) or isinstance(pot.hopf, ExpFunction):
        raise UnsupportedMap("exponential potentials have no JSON form")
    return {
        "type": "custom",
        "f_num": [_pair(z) for z in pot.f.num],
        "f_den": [_pair(z) for z in pot.f.den],
        "E": [_pair(z) for z in pot.hopf.num],
    }
