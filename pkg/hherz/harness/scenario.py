"""
Scenario documents.

A scenario is one JSON object naming every ingredient of an inequality check::

    {
        "name": "thm2",
        "n": 1,
        "kernel": {"kind": "char_shell", "r1": 1, "r2": 2},
        "matrix_field": {"kind": "inverse_dilation"},
        "symbol_b": {"kind": "log_norm"},
        "f": {"kind": "char_annulus", "k1": 0, "k2": 1},
        "weight": {"kind": "power", "beta": 0.5},
        "theorem": {"which": "thm2", "p": 2, "q": 4, "q1": 2, "q2": 1.3333333333333333,
                    "alpha1": 0, "alpha2": -1},
        "quad": {"method": "stratified_monte_carlo", "budget": 200000, "seed": 7},
        "herz_window": [-6, 6],
        "cbmo_grid": [-8, 8]
    }

`"outer_budget"` optionally fixes the number of outer nodes per annulus of
the nested left-hand-side quadrature.
"""
import hashlib
import json
import logging
from math import isqrt
from pathlib import Path
from typing import NamedTuple

from ..errors import ScenarioError
from ..function_spaces import DEFAULT_CBMO_GRID, DEFAULT_HERZ_WINDOW, TestFunction
from ..graded_matrix import MatrixField
from ..hausdorff import Kernel, TheoremKind, TheoremParams
from ..quadrature import QuadSpec
from ..weights import Weight

__all__ = "REQUIRED_FIELDS", "OPTIONAL_FIELDS", "Scenario", "load_scenario"

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = frozenset({"name", "n", "kernel", "matrix_field", "symbol_b", "f", "weight", "theorem", "quad"})
OPTIONAL_FIELDS = frozenset({"herz_window", "cbmo_grid", "outer_budget", "description"})
_THEOREM_FIELDS = frozenset({"which", "p", "q", "q1", "q2", "alpha1", "alpha2", "delta"})
_NON_PHYSICAL = frozenset({"name", "quad", "outer_budget", "description"})


def _window(value, name: str) -> tuple[int, int]:
    lo, hi = value
    if int(lo) != lo or int(hi) != hi or lo > hi:
        raise ValueError(f"{name} must be two increasing integers (got {value})")
    return int(lo), int(hi)

def _theorem(literal: dict, weight: Weight) -> TheoremParams:
    unknown = set(literal) - _THEOREM_FIELDS
    if unknown:
        raise ValueError(f"unknown theorem fields {sorted(unknown)}")

    return TheoremParams(
        which=TheoremKind(literal["which"]),
        p=float(literal["p"]),
        q=float(literal["q"]),
        q1=float(literal["q1"]),
        q2=float(literal["q2"]),
        alpha1=float(literal["alpha1"]),
        alpha2=float(literal["alpha2"]),
        weight=weight,
        delta=None if literal.get("delta") is None else float(literal["delta"]),
    )


class Scenario(NamedTuple):
    """
    A fully resolved scenario.

    Parameters
    ----------
    name : str
        Scenario name.
    n : int
        Dimension parameter.
    kernel : Kernel
        Kernel `Phi`.
    matrix_field : MatrixField
        Matrix field `A`.
    symbol_b : TestFunction
        Commutator symbol `b`.
    f : TestFunction
        Function `f`.
    theorem : TheoremParams
        Exponents and weight.
    quad : QuadSpec
        Quadrature for every integral.
    herz_window : tuple[int, int]
        Annulus indices of every Herz norm.
    cbmo_grid : tuple[int, int]
        Radius exponents of the CBMO norm.
    outer_budget : int | None
        Outer nodes per annulus of the nested quadrature; `None` uses
        `isqrt(quad.budget)`.
    literal : dict
        The document the scenario was read from.

    Methods
    -------
    from_literal:
        Resolve a scenario document.
    digest:
        Hash of the physical content of the document.
    with_overrides:
        Replace seed, budget or dimension.
    nested_budgets:
        Outer nodes and inner budget of the left-hand side.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    name: str
    n: int
    kernel: Kernel
    matrix_field: MatrixField
    symbol_b: TestFunction
    f: TestFunction
    theorem: TheoremParams
    quad: QuadSpec
    herz_window: tuple[int, int]
    cbmo_grid: tuple[int, int]
    outer_budget: int | None
    literal: dict

    @classmethod
    def from_literal(cls, literal: dict) -> "Scenario":
        """
        Resolve a scenario document.

        Raises
        ------
        ScenarioError
            On missing or unknown fields and on any value the catalogs reject.
        """
        if not isinstance(literal, dict):
            raise ScenarioError("a scenario must be a JSON object")

        missing = REQUIRED_FIELDS - set(literal)
        if missing:
            raise ScenarioError(f"scenario is missing {sorted(missing)}")
        unknown = set(literal) - REQUIRED_FIELDS - OPTIONAL_FIELDS
        if unknown:
            raise ScenarioError(f"unknown scenario fields {sorted(unknown)}")

        try:
            n = int(literal["n"])
            if n < 1 or n != literal["n"]:
                raise ValueError(f"n must be a positive integer (got {literal['n']})")

            weight = Weight.from_literal(literal["weight"], n)
            outer_budget = literal.get("outer_budget")
            if outer_budget is not None and outer_budget < 1:
                raise ValueError(f"outer_budget must be positive ({outer_budget=})")

            scenario = cls(
                name=str(literal["name"]),
                n=n,
                kernel=Kernel.from_literal(literal["kernel"]),
                matrix_field=MatrixField.from_literal(literal["matrix_field"], n),
                symbol_b=TestFunction.from_literal(literal["symbol_b"]),
                f=TestFunction.from_literal(literal["f"]),
                theorem=_theorem(literal["theorem"], weight),
                quad=QuadSpec.from_literal(literal["quad"]),
                herz_window=_window(literal.get("herz_window", DEFAULT_HERZ_WINDOW), "herz_window"),
                cbmo_grid=_window(literal.get("cbmo_grid", DEFAULT_CBMO_GRID), "cbmo_grid"),
                outer_budget=outer_budget,
                literal=literal,
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ScenarioError(f"malformed scenario {literal.get('name')!r}: {e}") from e

        logger.info("loaded scenario %r (%s)", scenario.name, scenario.theorem.which.value)
        return scenario

    def digest(self) -> str:
        """
        SHA-256 of the document without its name and quadrature settings, so
        reruns with other seeds or budgets share a baseline.
        """
        physical = {key: value for key, value in self.literal.items() if key not in _NON_PHYSICAL}
        physical["n"] = self.n
        canonical = json.dumps(physical, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def with_overrides(self, *, seed: int | None=None, budget: int | None=None, n: int | None=None) -> "Scenario":
        """
        The scenario with command-line overrides applied.
        """
        literal = dict(self.literal)
        quad = dict(literal["quad"])
        if seed is not None:
            quad["seed"] = seed
        if budget is not None:
            quad["budget"] = budget
        literal["quad"] = quad
        if n is not None:
            literal["n"] = n

        return Scenario.from_literal(literal)

    def nested_budgets(self) -> tuple[int, int]:
        """
        `(outer, inner)`: outer nodes per annulus and the inner budget of
        each commutator evaluation, with `outer * inner <= quad.budget`.
        """
        outer = self.outer_budget or max(isqrt(self.quad.budget), 1)
        outer = min(outer, self.quad.budget)
        return outer, max(self.quad.budget // outer, 1)


def load_scenario(path: str | Path) -> Scenario:
    """
    Read and resolve a scenario file.

    Raises
    ------
    ScenarioError
        If the file cannot be read or parsed.
    """
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as handle:
            literal = json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ScenarioError(f"cannot read scenario {path}: {e}") from e

    return Scenario.from_literal(literal)
