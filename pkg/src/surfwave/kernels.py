"""Interaction kernels of the surface-wave amplitude equation.

All kernels are real-valued, vectorized over ``k`` and ``l`` (numpy
broadcasting) and return exact zeros at their removable singularities.
``sgn(0)`` is taken as 0 throughout.

Naming follows the roles of the kernels:

* ``lambda_plus`` / ``lambda_minus``: raw kernels of the solvability
  conditions for ``k > 0`` and ``k < 0``.
* ``lambda01`` / ``lambda02``: the two pieces of the unified kernel valid
  for every ``k != 0``.
* ``tilde_lambda01`` / ``tilde_lambda02``: the same pieces in shifted
  variables, ``lambda0i(k, l) = sgn(k) * tilde_lambda0i(k - l, l)``.
* ``tilde_lambda_sym``: symmetrized kernel (closed form), ``lambda_simpler``
  its piecewise form, ``lambda_alternate`` its compact form.
* ``lambda_canonical``: the rescaled kernel of the canonical equation and
  ``s_kernel`` its version for the noncanonical variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

ArrayLike = float | np.ndarray


@dataclass(frozen=True)
class KernelContext:
    """Vacuum decay factor ``sigma`` of the selected phase velocity."""

    sigma: float

    def __post_init__(self):
        if not (0.0 < self.sigma <= 1.0):
            raise ValueError(f"sigma must lie in (0, 1], got {self.sigma!r}")


def _div(num, den):
    """``num / den`` with 0 wherever ``den == 0`` (the removable points)."""
    num, den = np.broadcast_arrays(np.asarray(num, dtype=float), np.asarray(den, dtype=float))
    out = np.zeros(num.shape)
    np.divide(num, den, out=out, where=den != 0)
    return out if out.ndim else float(out)


def _ret(x):
    x = np.asarray(x, dtype=float)
    return x if x.ndim else float(x)


def lambda_plus(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    k, l = np.asarray(k, float), np.asarray(l, float)
    s = ctx.sigma
    m = k - l
    am, ak, al = np.abs(m), np.abs(k), np.abs(l)
    out = (l * _div(am * (am - al) + m * al - am * l, am + ak + al)
           + _div(m * al * (al - l), ak + al)
           - m * al
           + s * (-k * al + 0.5 * ((k + l) * l - am * al)))
    return _ret(out)


def lambda_minus(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    k, l = np.asarray(k, float), np.asarray(l, float)
    s = ctx.sigma
    m = k - l
    am, ak, al = np.abs(m), np.abs(k), np.abs(l)
    out = (l * _div(am * (am - al) - m * al + am * l, am + ak + al)
           + _div(m * al * (al + l), ak + al)
           - m * al
           + s * (-k * al - 0.5 * ((k + l) * l - am * al)))
    return _ret(out)


def lambda01(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    k, l = np.asarray(k, float), np.asarray(l, float)
    m = k - l
    am, ak, al = np.abs(m), np.abs(k), np.abs(l)
    body = (l * _div(m * al - am * l, am + ak + al)
            - _div(m * al * l, ak + al)
            + 0.5 * ctx.sigma * ((k + l) * l - am * al))
    return _ret(np.sign(k) * body)


def lambda02(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    k, l = np.asarray(k, float), np.asarray(l, float)
    m = k - l
    am, ak, al = np.abs(m), np.abs(k), np.abs(l)
    out = (l * _div(am * (am - al), am + ak + al)
           + _div(m * l * l, ak + al)
           - m * al
           - ctx.sigma * k * al)
    return _ret(out)


def lambda0(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    """Unified kernel, equal to ``lambda_plus`` for k > 0 and ``lambda_minus`` for k < 0."""
    return _ret(np.asarray(lambda01(k, l, ctx)) + np.asarray(lambda02(k, l, ctx)))


def tilde_lambda01(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    k, l = np.asarray(k, float), np.asarray(l, float)
    ak, al, akl = np.abs(k), np.abs(l), np.abs(k + l)
    out = (l * _div(k * al - ak * l, ak + akl + al)
           - _div(k * l * al, akl + al)
           + 0.5 * ctx.sigma * ((k + 2 * l) * l - np.abs(k * l)))
    return _ret(out)


def tilde_lambda02(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    k, l = np.asarray(k, float), np.asarray(l, float)
    ak, al, akl = np.abs(k), np.abs(l), np.abs(k + l)
    body = (_div(ak * l * (ak - al), akl + ak + al)
            + _div(k * l * l, akl + al)
            - k * al
            - ctx.sigma * (k + l) * al)
    return _ret(np.sign(k + l) * body)


def tilde_lambda_sym(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    """Symmetrized kernel evaluated through its explicit closed form."""
    k, l = np.asarray(k, float), np.asarray(l, float)
    s = ctx.sigma
    ak, al, akl = np.abs(k), np.abs(l), np.abs(k + l)
    d3 = akl + ak + al
    cross = ak * l - k * al
    even = (_div((k - l) * cross, d3)
            - _div(k * l * al, akl + al)
            - _div(ak * k * l, akl + ak)
            + s * (k * k + l * l + k * l - np.abs(k * l)))
    odd = (_div((ak - al) * cross, d3)
           + _div(k * l * l, akl + al)
           + _div(k * k * l, akl + ak)
           - k * al - ak * l
           - s * (k + l) * (ak + al))
    return _ret(0.5 * even + 0.5 * np.sign(k + l) * odd)


def tilde_lambda_sym_from_parts(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    """Symmetrization of ``tilde_lambda01 + tilde_lambda02`` computed term by term."""
    parts = (np.asarray(tilde_lambda01(k, l, ctx)) + np.asarray(tilde_lambda01(l, k, ctx))
             + np.asarray(tilde_lambda02(k, l, ctx)) + np.asarray(tilde_lambda02(l, k, ctx)))
    return _ret(0.5 * parts)


def lambda_simpler(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    """Piecewise-polynomial form of the symmetrized kernel.

    Defined directly on the sectors ``k, l > 0`` and ``k + l > 0 > l`` and
    extended to the plane by symmetry and reality.
    """
    k, l = np.broadcast_arrays(np.asarray(k, float), np.asarray(l, float))
    g = 1.0 + ctx.sigma
    out = np.zeros(k.shape)
    same = k * l > 0
    out[same] = -g * k[same] * l[same]
    # opposite signs: the factor is the one of smaller modulus, times k + l
    opp = (k * l < 0) & (k + l != 0)
    small = np.where(np.abs(k) < np.abs(l), k, l)
    out[opp] = g * small[opp] * (k[opp] + l[opp])
    return _ret(out)


def lambda_alternate(k: ArrayLike, l: ArrayLike, ctx: KernelContext) -> ArrayLike:
    return _ret(-(1.0 + ctx.sigma) * np.asarray(lambda_canonical(k, l)))


def lambda_canonical(k: ArrayLike, l: ArrayLike) -> ArrayLike:
    """``2 |k+l| |k| |l| / (|k+l| + |k| + |l|)``.

    Equivalently, the product of the two smallest of ``|k|, |l|, |k+l|``.
    """
    k, l = np.asarray(k, float), np.asarray(l, float)
    ak, al, akl = np.abs(k), np.abs(l), np.abs(k + l)
    return _div(2.0 * akl * ak * al, akl + ak + al)


def s_kernel(k: ArrayLike, l: ArrayLike) -> ArrayLike:
    """Kernel of the noncanonical equation, ``lambda_canonical / |k l (k+l)|^(1/2)``.

    Written as ``2 |k l (k+l)|^(1/2) / (|k| + |l| + |k+l|)``, which vanishes
    on ``k l (k+l) = 0`` without special-casing.
    """
    k, l = np.asarray(k, float), np.asarray(l, float)
    ak, al, akl = np.abs(k), np.abs(l), np.abs(k + l)
    return _div(2.0 * np.sqrt(ak * al * akl), akl + ak + al)


# -- identity predicates ------------------------------------------------------

class IdentityResult(NamedTuple):
    name: str
    samples: int
    max_abs_err: float
    passed: bool

    def tsv(self) -> str:
        return f"{self.name}\t{self.samples}\t{self.max_abs_err:.3e}\t{'pass' if self.passed else 'FAIL'}"


def normalized_points(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Random ``(k, l)`` with ``|k| + |l| = 1``, covering every sign pattern."""
    k = rng.standard_normal(n)
    l = rng.standard_normal(n)
    scale = np.abs(k) + np.abs(l)
    return k / scale, l / scale


def _err(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def kernel_identities(n: int = 100_000, seed: int = 0, sigmas=(0.1, 0.5, 1.0),
                      alphas=(0.5, 2.0, 10.0), tol: float = 1e-12,
                      canonical: Callable = lambda_canonical,
                      noncanonical: Callable = s_kernel) -> list[IdentityResult]:
    """Evaluate the kernel identities on ``n`` normalized random points.

    ``canonical`` and ``noncanonical`` may be swapped for mutated kernels
    to confirm that a defect is localized by the suite.
    """
    rng = np.random.default_rng(seed)
    k, l = normalized_points(rng, n)
    rows: list[IdentityResult] = []

    def add(name, err, samples=n):
        rows.append(IdentityResult(name, samples, err, err <= tol))

    lam = canonical(k, l)
    s = noncanonical(k, l)
    add("Lambda.symmetry", _err(lam, canonical(l, k)))
    add("Lambda.reality", _err(lam, canonical(-k, -l)))
    add("Lambda.homogeneity", max(_err(canonical(a * k, a * l), a ** 2 * lam) for a in alphas), n * len(alphas))
    add("Lambda.hamiltonian", _err(canonical(k + l, -l), lam))
    add("S.symmetry", _err(s, noncanonical(l, k)))
    add("S.reality", _err(s, noncanonical(-k, -l)))
    add("S.homogeneity", max(_err(noncanonical(a * k, a * l), np.sqrt(a) * s) for a in alphas), n * len(alphas))
    add("S.hamiltonian", _err(noncanonical(k + l, -l), s))
    # kernel bound |S(k-l, l)| <= min(|k|, |k-l|, |l|)^(1/2); report the excess
    excess = np.asarray(noncanonical(k - l, l)) - np.sqrt(np.minimum(np.minimum(np.abs(k), np.abs(k - l)), np.abs(l)))
    add("S.min_bound", float(max(np.max(excess), 0.0)))

    m = len(sigmas) * n
    e = {name: 0.0 for name in ("Lambda0.plus", "Lambda0.minus", "tilde01.shift", "tilde02.shift",
                                "tilde.sym_vs_closed", "tilde.closed_vs_simpler",
                                "tilde.closed_vs_alternate", "tilde.simpler_vs_alternate",
                                "tilde.symmetry", "tilde.reality", "tilde.homogeneity")}
    for sig in sigmas:
        ctx = KernelContext(sig)
        kp, kn = np.abs(k), -np.abs(k)
        e["Lambda0.plus"] = max(e["Lambda0.plus"], _err(lambda0(kp, l, ctx), lambda_plus(kp, l, ctx)))
        e["Lambda0.minus"] = max(e["Lambda0.minus"], _err(lambda0(kn, l, ctx), lambda_minus(kn, l, ctx)))
        e["tilde01.shift"] = max(e["tilde01.shift"],
                                 _err(lambda01(k, l, ctx), np.sign(k) * tilde_lambda01(k - l, l, ctx)))
        e["tilde02.shift"] = max(e["tilde02.shift"],
                                 _err(lambda02(k, l, ctx), np.sign(k) * tilde_lambda02(k - l, l, ctx)))
        closed = tilde_lambda_sym(k, l, ctx)
        simple = lambda_simpler(k, l, ctx)
        alt = lambda_alternate(k, l, ctx)
        e["tilde.sym_vs_closed"] = max(e["tilde.sym_vs_closed"], _err(tilde_lambda_sym_from_parts(k, l, ctx), closed))
        e["tilde.closed_vs_simpler"] = max(e["tilde.closed_vs_simpler"], _err(closed, simple))
        e["tilde.closed_vs_alternate"] = max(e["tilde.closed_vs_alternate"], _err(closed, alt))
        e["tilde.simpler_vs_alternate"] = max(e["tilde.simpler_vs_alternate"], _err(simple, alt))
        e["tilde.symmetry"] = max(e["tilde.symmetry"], _err(closed, tilde_lambda_sym(l, k, ctx)))
        e["tilde.reality"] = max(e["tilde.reality"], _err(closed, tilde_lambda_sym(-k, -l, ctx)))
        e["tilde.homogeneity"] = max(e["tilde.homogeneity"], max(
            _err(tilde_lambda_sym(a * k, a * l, ctx), a ** 2 * closed) / max(1.0, a ** 2) for a in alphas))
    for name, err in e.items():
        add(name, err, m)
    return rows


def bandlimited_profile(rng: np.random.Generator, band: float, n_terms: int = 6) -> Callable:
    """Random smooth profile ``f(l)`` supported in ``|l| < band`` with ``f(-l) = conj f(l)``.

    Real part even, imaginary part odd, both times a C-infinity bump.
    """
    re_amp = rng.standard_normal(n_terms)
    im_amp = rng.standard_normal(n_terms)
    freq = rng.uniform(0.5, 6.0, n_terms) / band

    def f(l):
        x = np.asarray(l, float) / band
        env = np.zeros_like(x)
        inside = np.abs(x) < 1
        env[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
        arg = np.multiply.outer(np.asarray(l, float), freq)
        return env * (np.cos(arg) @ re_amp + 1j * (np.sin(arg) @ im_amp))

    return f


def quadrature_nodes(k: float, band: float, n_nodes: int = 1 << 12) -> tuple[np.ndarray, float]:
    """Trapezoid nodes for ``int g(k - l, l) dl`` over profiles supported in ``|l| < band``.

    The lattice ``l = m h`` has ``k`` as an integer multiple of ``h``, so 0
    and ``k`` (the kinks of every kernel in the family) are nodes and the
    map ``l -> k - l`` permutes the nodes.  The profile vanishes at both
    ends, so the trapezoid weights are uniform.
    """
    if 2.0 * band - abs(k) <= 0:
        return np.zeros(0), 0.0
    h = 2.0 * band / n_nodes
    if k != 0:
        h = abs(k) / max(1, round(abs(k) / h))
    shift = int(round(k / h))
    reach = int(np.ceil(band / h))
    return h * np.arange(min(0, shift) - reach, max(0, shift) + reach + 1), h


def convolution_quadrature(kernel: Callable, f: Callable, k: float, band: float,
                           n_nodes: int = 1 << 12) -> tuple[complex, float]:
    """Trapezoid rule for ``int kernel(k, l) f(k - l) f(l) dl``.

    Returns the integral and ``int |kernel f f| dl`` as a magnitude scale.
    """
    nodes, h = quadrature_nodes(k, band, n_nodes)
    if nodes.size == 0:
        return 0j, 0.0
    vals = np.asarray(kernel(k, nodes)) * f(k - nodes) * f(nodes)
    return complex(h * np.sum(vals)), float(h * np.sum(np.abs(vals)))


def symmetrization_check(n_profiles: int = 20, n_k: int = 64, sigma: float = 0.5, seed: int = 0,
                         band: float = 1.0, tol: float = 1e-8,
                         n_nodes: int = 1 << 12) -> list[IdentityResult]:
    """Compare the raw kernels with the symmetrized and canonical ones under the integral.

    For random Hermitian profiles ``f`` and ``k`` on both sides of 0,
    ``int lambda_pm(k, l) f(k-l) f(l) dl`` must equal
    ``sgn(k) int tilde_lambda_sym(k-l, l) f(k-l) f(l) dl`` (the antisymmetric
    part integrates to zero) and also ``-(1+sigma) sgn(k) int
    lambda_canonical(k-l, l) ...``.  Errors are relative to the size of the
    raw integral.
    """
    ctx = KernelContext(sigma)
    rng = np.random.default_rng(seed)
    ks = np.linspace(0.0, 2.0 * band, n_k + 2)[1:-1]
    worst = {"plus.sym": 0.0, "plus.canonical": 0.0, "minus.sym": 0.0, "minus.canonical": 0.0}
    for _ in range(n_profiles):
        f = bandlimited_profile(rng, band)
        for tag, sign, raw in (("plus", 1.0, lambda_plus), ("minus", -1.0, lambda_minus)):
            for k in sign * ks:
                nodes, h = quadrature_nodes(k, band, n_nodes)
                ff = f(k - nodes) * f(nodes)
                ref = h * np.sum(np.asarray(raw(k, nodes, ctx)) * ff)
                sym = sign * h * np.sum(np.asarray(tilde_lambda_sym(k - nodes, nodes, ctx)) * ff)
                can = -(1.0 + sigma) * sign * h * np.sum(np.asarray(lambda_canonical(k - nodes, nodes)) * ff)
                scale = max(abs(ref), 1e-300)
                worst[f"{tag}.sym"] = max(worst[f"{tag}.sym"], abs(sym - ref) / scale)
                worst[f"{tag}.canonical"] = max(worst[f"{tag}.canonical"], abs(can - ref) / scale)
    n = n_profiles * n_k
    return [IdentityResult(f"symmetrization.{name}", n, err, err <= tol) for name, err in worst.items()]
