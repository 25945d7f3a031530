"""Sparse multivariate polynomials with real coefficients.

Terms are stored as a map from exponent tuples to coefficients. This is the
carrier for symbolic characteristic polynomials and the stability-region
inequalities, where variables are gain entries followed by parameters.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .errors import DimensionMismatch

# Coefficients at or below this magnitude are dropped after every arithmetic
# operation so that cancelled terms do not accrete as numerical dust.
CLEANUP_TOL = 1e-12


class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` real variables."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], float] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean: dict[tuple[int, ...], float] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise DimensionMismatch(
                    f"exponent tuple {exps} has length {len(exps)}, expected {nvars}"
                )
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = float(c)
            if abs(c) > CLEANUP_TOL:
                clean[exps] = clean.get(exps, 0.0) + c
        # A second pass: merging duplicate keys above may have cancelled terms.
        object.__setattr__(self, "terms", {e: c for e, c in clean.items() if abs(c) > CLEANUP_TOL})
        object.__setattr__(self, "nvars", int(nvars))

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, nvars: int) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: float(value)})

    @classmethod
    def variable(cls, index: int, nvars: int) -> "MultiPoly":
        if not 0 <= index < nvars:
            raise DimensionMismatch(f"variable index {index} out of range for {nvars} vars")
        exps = tuple(1 if i == index else 0 for i in range(nvars))
        return cls(nvars, {exps: 1.0})

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def degree(self) -> int:
        """Total degree; zero polynomial reports -1 by convention."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def coeff(self, exps: Iterable[int]) -> float:
        return self.terms.get(tuple(int(e) for e in exps), 0.0)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise DimensionMismatch(
                    f"mixing polynomials over {other.nvars} and {self.nvars} variables"
                )
            return other
        return MultiPoly.constant(float(other), self.nvars)

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for exps, c in other.terms.items():
            out[exps] = out.get(exps, 0.0) + c
        return MultiPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        out: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0.0) + c1 * c2
        return MultiPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0 or k != int(k):
            raise ValueError("exponent must be a nonnegative integer")
        out = MultiPoly.constant(1.0, self.nvars)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- evaluation --------------------------------------------------------

    def eval(self, point: Iterable[float]) -> float:
        point = [float(v) for v in point]
        if len(point) != self.nvars:
            raise DimensionMismatch(
                f"point has {len(point)} coordinates, polynomial has {self.nvars} variables"
            )
        total = 0.0
        for exps, c in self.terms.items():
            term = c
            for v, e in zip(point, exps):
                if e:
                    term *= v**e
            total += term
        return total

    __call__ = eval

    def partial(self, index: int) -> "MultiPoly":
        """Partial derivative with respect to variable ``index``."""
        if not 0 <= index < self.nvars:
            raise DimensionMismatch(f"variable index {index} out of range for {self.nvars} vars")
        out: dict[tuple[int, ...], float] = {}
        for exps, c in self.terms.items():
            e = exps[index]
            if e == 0:
                continue
            key = exps[:index] + (e - 1,) + exps[index + 1 :]
            out[key] = out.get(key, 0.0) + c * e
        return MultiPoly(self.nvars, out)

    def gradient_at(self, point) -> "list[float]":
        """All first partials evaluated at a point."""
        return [self.partial(i).eval(point) for i in range(self.nvars)]

    def max_coeff_diff(self, other: "MultiPoly") -> float:
        """Largest absolute coefficient difference against another polynomial."""
        other = self._coerce(other)
        keys = set(self.terms) | set(other.terms)
        if not keys:
            return 0.0
        return max(abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) for k in keys)

    # -- printing ----------------------------------------------------------

    def to_string(self, names: list[str] | None = None) -> str:
        """Canonical rendering: graded, then lexicographically descending.

        With variables named (K1, K2, rho) this prints e.g.
        ``K1 + 0.5*K2 + rho - 1``.
        """
        if names is None:
            names = [f"x{i}" for i in range(self.nvars)]
        if len(names) != self.nvars:
            raise DimensionMismatch("one name per variable required")
        if not self.terms:
            return "0"
        ordered = sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)
        pieces = []
        for exps, c in ordered:
            factors = []
            for name, e in zip(names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if factors and abs(mag - 1.0) < 1e-15:
                body = "*".join(factors)
            elif factors:
                body = f"{mag:g}*" + "*".join(factors)
            else:
                body = f"{mag:g}"
            if not pieces:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(("+ " if c > 0 else "- ") + body)
        return " ".join(pieces)

    def __repr__(self):
        return f"MultiPoly({self.nvars}, {self.to_string()})"
