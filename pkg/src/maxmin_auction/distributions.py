"""CDFs on [0, 1] with explicit atoms.

One container covers the four shapes the package needs:

* ``reserve``  -- the analytic reserve-price CDF (continuous, strictly
  increasing, removable point at ``a``);
* ``signal``   -- the analytic worst-case signal CDF (unit-elastic body with
  an atom at 1);
* ``uniform``  -- the identity CDF, used by the second-moment variant;
* ``grid``     -- a right-continuous piecewise-linear CDF given by knots,
  values and explicit atom masses (adversary iterates, user CSV input,
  discrete priors);
* ``custom``   -- arbitrary vectorised callables, for reserve variants that
  differ from the analytic one below ``a``.

Atoms are carried explicitly, never smeared into the linear parts: the value
stored at a knot is the right limit, and the left limit is value minus atom
mass.  CSV round-trips use the column layout ``x, F, atom_mass`` with a
mandatory header.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import constants as cf
from .errors import DomainError
from .quadrature import adaptive_simpson

__all__ = ["PiecewiseCdf", "read_cdf_csv", "write_cdf_csv"]

_VAL_TOL = 1e-9


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


@dataclass(frozen=True)
class PiecewiseCdf:
    """A distribution on [0, 1]; see module docstring for the supported kinds."""

    kind: str
    constants: "cf.SolvedConstants | None" = None
    knots: np.ndarray | None = None
    values: np.ndarray | None = None
    masses: np.ndarray | None = None
    cdf_fn: Callable[[np.ndarray], np.ndarray] | None = None
    pdf_fn: Callable[[np.ndarray], np.ndarray] | None = None
    integral_fn: Callable[[np.ndarray], np.ndarray] | None = None
    atom_list: tuple[tuple[float, float], ...] = ()
    breakpoints: tuple[float, ...] = ()

    # ------------------------------------------------------------------ #
    # constructors
    # ------------------------------------------------------------------ #

    @classmethod
    def reserve(cls, c: "cf.SolvedConstants") -> "PiecewiseCdf":
        """The analytic reserve-price CDF for solved constants ``c``."""
        return cls(kind="reserve", constants=c, breakpoints=(c.a,))

    @classmethod
    def signal(cls, c: "cf.SolvedConstants") -> "PiecewiseCdf":
        """The analytic worst-case signal CDF: atom of mass ``a`` at 1."""
        return cls(
            kind="signal",
            constants=c,
            atom_list=((1.0, c.a),),
            breakpoints=(c.a,),
        )

    @classmethod
    def uniform(cls) -> "PiecewiseCdf":
        """The identity CDF on [0, 1]."""
        return cls(kind="uniform")

    @classmethod
    def from_grid(
        cls,
        knots: Sequence[float],
        values: Sequence[float],
        atoms: Sequence[tuple[float, float]] = (),
    ) -> "PiecewiseCdf":
        """Piecewise-linear CDF through ``(knots, values)`` with explicit atoms.

        Values are right limits; every atom location must coincide with a
        knot.  If the grid does not reach 0 or 1 it is completed with constant
        extensions: the value left of the first knot becomes an atom at 0, and
        any deficit below 1 becomes an atom at 1.
        """
        x = np.asarray(knots, dtype=float).copy()
        v = np.asarray(values, dtype=float).copy()
        if x.ndim != 1 or x.shape != v.shape or x.size < 1:
            raise DomainError("knots and values must be equal-length 1-d arrays")
        if np.any(np.diff(x) <= 0.0):
            raise DomainError("knots must be strictly increasing")
        if x[0] < 0.0 or x[-1] > 1.0:
            raise DomainError("knots must lie in [0, 1]")
        if np.any(v < -_VAL_TOL) or np.any(v > 1.0 + _VAL_TOL):
            raise DomainError("CDF values must lie in [0, 1]")
        v = np.clip(v, 0.0, 1.0)

        mass = {float(loc): float(m) for loc, m in atoms if m != 0.0}
        if any(m < 0.0 for m in mass.values()):
            raise DomainError("atom masses must be nonnegative")

        # Complete the support to [0, 1].
        if x[0] > 0.0:
            first_left = v[0] - mass.get(float(x[0]), 0.0)
            x = np.concatenate(([0.0], x))
            v = np.concatenate(([first_left], v))
            if first_left > 0.0:
                mass[0.0] = first_left + mass.get(0.0, 0.0)
        elif v[0] > 0.0:
            # F(0-) = 0, so the full value at the origin is an atom there.
            mass[0.0] = v[0]
        if x[-1] < 1.0:
            deficit = 1.0 - v[-1]
            x = np.concatenate((x, [1.0]))
            v = np.concatenate((v, [1.0]))
            if deficit > 0.0:
                mass[1.0] = deficit + mass.get(1.0, 0.0)
        if abs(v[-1] - 1.0) > _VAL_TOL:
            raise DomainError(f"CDF must reach 1 at x = 1, got {v[-1]}")
        v[-1] = 1.0

        m = np.zeros_like(v)
        for loc, mm in mass.items():
            idx = np.searchsorted(x, loc)
            if idx >= x.size or x[idx] != loc:
                raise DomainError(f"atom at {loc} does not coincide with a knot")
            m[idx] = mm

        left = v - m
        if np.any(left[1:] < v[:-1] - _VAL_TOL) or np.any(left < -_VAL_TOL):
            raise DomainError("CDF values (net of atoms) must be nondecreasing")

        atom_list = tuple((float(x[i]), float(m[i])) for i in np.nonzero(m)[0])
        interior = tuple(float(t) for t in x[1:-1])
        return cls(
            kind="grid",
            knots=x,
            values=v,
            masses=m,
            atom_list=atom_list,
            breakpoints=interior,
        )

    @classmethod
    def from_discrete(
        cls, points: Sequence[float], masses: Sequence[float]
    ) -> "PiecewiseCdf":
        """Purely atomic distribution supported on ``points`` with ``masses``."""
        pts = np.asarray(points, dtype=float)
        ms = np.asarray(masses, dtype=float)
        if pts.shape != ms.shape or pts.ndim != 1 or pts.size == 0:
            raise DomainError("points and masses must be equal-length 1-d arrays")
        order = np.argsort(pts)
        pts, ms = pts[order], ms[order]
        if abs(ms.sum() - 1.0) > _VAL_TOL:
            raise DomainError("masses must sum to 1")
        vals = np.cumsum(ms)
        vals[-1] = 1.0
        return cls.from_grid(pts, vals, atoms=tuple(zip(pts.tolist(), ms.tolist())))

    @classmethod
    def point_mass(cls, p: float) -> "PiecewiseCdf":
        """Degenerate distribution at ``p``."""
        return cls.from_discrete([p], [1.0])

    @classmethod
    def custom(
        cls,
        cdf_fn: Callable[[np.ndarray], np.ndarray],
        pdf_fn: Callable[[np.ndarray], np.ndarray] | None = None,
        atoms: Sequence[tuple[float, float]] = (),
        breakpoints: Sequence[float] = (),
        integral_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    ) -> "PiecewiseCdf":
        """Wrap vectorised callables as a CDF object."""
        return cls(
            kind="custom",
            cdf_fn=cdf_fn,
            pdf_fn=pdf_fn,
            integral_fn=integral_fn,
            atom_list=tuple(atoms),
            breakpoints=tuple(breakpoints),
        )

    # ------------------------------------------------------------------ #
    # evaluation
    # ------------------------------------------------------------------ #

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return self.atom_list

    def cdf(self, x):
        """Right-continuous CDF value at ``x`` (scalar or array)."""
        arr, scalar = _as_array(x)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError("CDF argument must lie in [0, 1]")
        if self.kind == "reserve":
            out = cf.reserve_cdf(self.constants, arr)
        elif self.kind == "signal":
            out = cf.signal_cdf(self.constants, arr)
        elif self.kind == "uniform":
            out = arr.copy()
        elif self.kind == "custom":
            out = np.asarray(self.cdf_fn(arr), dtype=float)
        else:
            out = self._grid_cdf(arr)
        out = np.asarray(out, dtype=float)
        return float(out) if scalar else out

    def _grid_cdf(self, arr: np.ndarray) -> np.ndarray:
        x, v, m = self.knots, self.values, self.masses
        idx = np.clip(np.searchsorted(x, arr, side="right") - 1, 0, x.size - 2)
        left_val = v[idx]
        right_left_limit = v[idx + 1] - m[idx + 1]
        width = x[idx + 1] - x[idx]
        frac = (arr - x[idx]) / width
        out = left_val + frac * (right_left_limit - left_val)
        return np.where(arr >= 1.0, 1.0, out)

    def pdf(self, x):
        """Density of the continuous part at ``x``; 0 where the CDF is flat.

        For grid CDFs this is the right-continuous segment slope.  Atom
        locations carry no density.
        """
        arr, scalar = _as_array(x)
        if self.kind == "reserve":
            out = cf.reserve_pdf(self.constants, arr)
        elif self.kind == "signal":
            out = cf.signal_pdf(self.constants, arr)
        elif self.kind == "uniform":
            out = np.ones_like(arr)
        elif self.kind == "custom":
            if self.pdf_fn is None:
                raise DomainError("this CDF has no density available")
            out = np.asarray(self.pdf_fn(arr), dtype=float)
        else:
            x_k, v, m = self.knots, self.values, self.masses
            idx = np.clip(np.searchsorted(x_k, arr, side="right") - 1, 0, x_k.size - 2)
            slope = (v[idx + 1] - m[idx + 1] - v[idx]) / (x_k[idx + 1] - x_k[idx])
            out = slope
        out = np.asarray(out, dtype=float)
        return float(out) if scalar else out

    def integral_to(self, x):
        """Exact integral of the CDF from 0 to ``x`` (scalar or array)."""
        arr, scalar = _as_array(x)
        if self.kind == "reserve":
            out = cf.reserve_cdf_integral(self.constants, arr)
        elif self.kind == "signal":
            a = self.constants.a
            gated = np.maximum(arr, a)
            out = np.where(arr <= a, 0.0, gated - a - a * np.log(gated / a))
        elif self.kind == "uniform":
            out = 0.5 * arr * arr
        elif self.kind == "custom":
            if self.integral_fn is not None:
                out = np.asarray(self.integral_fn(arr), dtype=float)
            else:
                out = np.array(
                    [adaptive_simpson(lambda t: float(self.cdf(t)), 0.0, float(t)) for t in np.atleast_1d(arr)]
                ).reshape(arr.shape)
        else:
            out = self._grid_integral(arr)
        out = np.asarray(out, dtype=float)
        return float(out) if scalar else out

    def _grid_segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-segment (width, left value, slope) of the linear parts."""
        x, v, m = self.knots, self.values, self.masses
        width = np.diff(x)
        left = v[:-1]
        slope = (v[1:] - m[1:] - left) / width
        return width, left, slope

    def _grid_integral(self, arr: np.ndarray) -> np.ndarray:
        x = self.knots
        width, left, slope = self._grid_segments()
        seg_int = width * left + 0.5 * slope * width * width
        cum = np.concatenate(([0.0], np.cumsum(seg_int)))
        idx = np.clip(np.searchsorted(x, arr, side="right") - 1, 0, x.size - 2)
        t = arr - x[idx]
        return cum[idx] + left[idx] * t + 0.5 * slope[idx] * t * t

    def mean(self) -> float:
        """E[X] = integral of (1 - F) over [0, 1], exact per kind."""
        if self.kind == "signal":
            return self.constants.mu
        if self.kind == "uniform":
            return 0.5
        return 1.0 - float(self.integral_to(1.0))

    def second_moment(self) -> float:
        """E[X^2] = 2 * integral of x(1 - F(x)), exact for grid/analytic kinds."""
        if self.kind == "grid":
            x = self.knots
            width, left, slope = self._grid_segments()
            p, q = x[:-1], x[1:]
            # integral of t*F(t) over each linear segment, in closed form
            int_xf = left * (q * q - p * p) / 2.0 + slope * (
                (q**3 - p**3) / 3.0 - p * (q * q - p * p) / 2.0
            )
            return 1.0 - 2.0 * math.fsum(int_xf.tolist())
        if self.kind == "uniform":
            return 1.0 / 3.0
        if self.kind == "signal":
            a = self.constants.a
            return 2.0 * a - a * a
        return 1.0 - 2.0 * adaptive_simpson(
            lambda t: t * float(self.cdf(t)), 0.0, 1.0, 1e-10
        )

    def quantile(self, u):
        """Generalised inverse: least x with F(x) >= u; u = 0 maps to the
        infimum of the support.  Vectorised."""
        arr, scalar = _as_array(u)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError("quantile level must lie in [0, 1]")
        arr_eff = np.maximum(arr, 1e-300)
        if self.kind == "signal":
            out = cf.signal_quantile(self.constants, arr)
        elif self.kind == "uniform":
            out = arr.copy()
        elif self.kind == "grid":
            out = self._grid_quantile(arr_eff)
        else:
            out = self._bisect_quantile(arr_eff)
        out = np.asarray(out, dtype=float)
        return float(out) if scalar else out

    def _grid_quantile(self, u: np.ndarray) -> np.ndarray:
        x, v, m = self.knots, self.values, self.masses
        left = v - m
        # first knot whose right value reaches u
        idx = np.clip(np.searchsorted(v, u, side="left"), 0, x.size - 1)
        at_atom = u > left[idx]
        prev = np.clip(idx - 1, 0, x.size - 1)
        rise = left[idx] - v[prev]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = (u - v[prev]) / rise
        inside = x[prev] + np.where(rise > 0.0, frac, 0.0) * (x[idx] - x[prev])
        out = np.where(at_atom | (idx == 0), x[idx], inside)
        return out

    def _bisect_quantile(self, u: np.ndarray) -> np.ndarray:
        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.cdf(mid)) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    # ------------------------------------------------------------------ #
    # CSV round trip (grid kind)
    # ------------------------------------------------------------------ #

    def to_csv(self, path: str | Path) -> None:
        """Write the grid representation as ``x, F, atom_mass`` rows."""
        if self.kind != "grid":
            raise DomainError("CSV output is defined for grid CDFs only")
        write_cdf_csv(path, self.knots, self.values, self.masses)

    @classmethod
    def from_csv(cls, path: str | Path) -> "PiecewiseCdf":
        return read_cdf_csv(path)


def write_cdf_csv(
    path: str | Path,
    x: Sequence[float],
    values: Sequence[float],
    masses: Sequence[float] | None = None,
) -> None:
    """Write a CDF curve as CSV; the atom column is included when any mass is set."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    has_atoms = masses is not None and np.any(np.asarray(masses) != 0.0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if has_atoms:
            writer.writerow(["x", "F", "atom_mass"])
            for xi, vi, mi in zip(x, values, np.asarray(masses, dtype=float)):
                writer.writerow([f"{xi:.17g}", f"{vi:.17g}", f"{mi:.17g}"])
        else:
            writer.writerow(["x", "F"])
            for xi, vi in zip(x, values):
                writer.writerow([f"{xi:.17g}", f"{vi:.17g}"])


def read_cdf_csv(path: str | Path) -> PiecewiseCdf:
    """Read a grid CDF from CSV (header required, optional atom_mass column)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not header or header[0].strip().lower() != "x":
            raise DomainError(f"{path}: missing CSV header row starting with 'x'")
        rows = [row for row in reader if row]
    if not rows:
        raise DomainError(f"{path}: no data rows")
    xs = np.array([float(r[0]) for r in rows])
    vs = np.array([float(r[1]) for r in rows])
    atoms = []
    if len(header) >= 3:
        for r in rows:
            if len(r) >= 3 and r[2].strip():
                mass = float(r[2])
                if mass != 0.0:
                    atoms.append((float(r[0]), mass))
    return PiecewiseCdf.from_grid(xs, vs, atoms=atoms)
