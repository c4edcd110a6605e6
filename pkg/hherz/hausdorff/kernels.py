"""
Kernels `Phi` of Hausdorff operators.
"""
from collections.abc import Callable
from enum import Enum
from math import inf
from typing import NamedTuple

import numpy as np

from ..data_structures import GroupDims, QuadResult, Shell
from ..heisenberg import hnorm
from ..quadrature import integrate_radial

__all__ = "KernelKind", "Kernel"


class KernelKind(str, Enum):
    """
    Kind of a :class:`Kernel`.

    :class:`KernelKind` is one of "char_shell", "power_decay", "custom".
    """
    CHAR_SHELL = "char_shell"
    POWER_DECAY = "power_decay"
    CUSTOM = "custom"


class Kernel(NamedTuple):
    """
    A kernel `Phi` on `H^n`.

    Parameters
    ----------
    kind : KernelKind
        Kind of kernel.
    params : tuple[float, ...], default: ()
        `(r1, r2)` for "char_shell", `(sigma, r0)` for "power_decay".
    coef : float, default: 1.0
        Multiplier.
    fn : Callable[[numpy.ndarray], numpy.ndarray] | None, default: None
        Evaluator of a custom kernel.
    custom_support : Shell | None, default: None
        Support of a custom kernel.
    custom_majorant : Callable[[float], float] | None, default: None
        Radial majorant of `|Phi|` for a custom kernel.

    Attributes
    ----------
    kind : KernelKind
        Kind of kernel.
    params : tuple[float, ...]
        Parameters of the kernel.
    coef : float
        Multiplier.
    fn : Callable[[numpy.ndarray], numpy.ndarray] | None
        Evaluator of a custom kernel.
    custom_support : Shell | None
        Support of a custom kernel.
    custom_majorant : Callable[[float], float] | None
        Radial majorant of `|Phi|` for a custom kernel.
    is_radial : bool
        Whether `Phi` depends on `|y|_h` only.
    support : Shell
        Shell outside which `Phi` vanishes.
    breakpoints : tuple[float, ...]
        Radii where `Phi` jumps.

    Methods
    -------
    char_shell:
        Indicator of `{r1 <= |y|_h <= r2}`.
    power_decay:
        `|y|_h**-sigma` on `|y|_h >= r0`.
    custom:
        A kernel given by an evaluator.
    from_literal:
        Kernel from a scenario-file mapping.
    scaled:
        `c Phi`.
    profile:
        Radial profile.
    majorant:
        Radial majorant of `|Phi|`.
    integrability:
        `int |Phi(y)| / |y|_h**Q dy`.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    kind: KernelKind
    params: tuple[float, ...] = ()
    coef: float = 1.0
    fn: Callable[[np.ndarray], np.ndarray] | None = None
    custom_support: Shell | None = None
    custom_majorant: Callable[[float], float] | None = None

    @classmethod
    def char_shell(cls, r1: float, r2: float) -> "Kernel":
        if not 0 <= r1 < r2 < inf:
            raise ValueError(f"char_shell needs 0 <= r1 < r2 < inf ({r1=}, {r2=})")
        return cls(KernelKind.CHAR_SHELL, (float(r1), float(r2)))

    @classmethod
    def power_decay(cls, sigma: float, r0: float) -> "Kernel":
        if sigma <= 0:
            raise ValueError(f"|Phi(y)| / |y|_h**Q is not integrable at infinity unless sigma > 0 ({sigma=})")
        if r0 <= 0:
            raise ValueError(f"power_decay needs r0 > 0 ({r0=})")
        return cls(KernelKind.POWER_DECAY, (float(sigma), float(r0)))

    @classmethod
    def custom(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        support: Shell,
        majorant: Callable[[float], float] | None=None,
    ) -> "Kernel":
        return cls(KernelKind.CUSTOM, fn=fn, custom_support=support, custom_majorant=majorant)

    @classmethod
    def from_literal(cls, literal: dict) -> "Kernel":
        """
        Kernel from `{"kind": "char_shell", "r1": 1, "r2": 2}` or
        `{"kind": "power_decay", "sigma": 5, "r0": 1}`, with an optional `"coef"`.
        """
        match KernelKind(literal.get("kind")):
            case KernelKind.CHAR_SHELL:
                names = "r1", "r2"
                constructor = cls.char_shell
            case KernelKind.POWER_DECAY:
                names = "sigma", "r0"
                constructor = cls.power_decay
            case _:
                raise ValueError("custom kernels cannot be read from a literal")

        unknown = set(literal) - {"kind", "coef", *names}
        if unknown:
            raise ValueError(f"unknown kernel fields {sorted(unknown)}")
        try:
            kernel = constructor(*(literal[name] for name in names))
        except KeyError as e:
            raise ValueError(f"kernel literal is missing {e}") from None

        return kernel.scaled(float(literal.get("coef", 1.0)))

    @property
    def is_radial(self) -> bool:
        return self.kind is not KernelKind.CUSTOM

    @property
    def support(self) -> Shell:
        match self.kind:
            case KernelKind.CHAR_SHELL:
                return Shell(*self.params)
            case KernelKind.POWER_DECAY:
                return Shell(self.params[1])

        return self.custom_support

    @property
    def breakpoints(self) -> tuple[float, ...]:
        match self.kind:
            case KernelKind.CHAR_SHELL:
                return self.params
            case KernelKind.POWER_DECAY:
                return self.params[1:]

        return ()

    def scaled(self, c: float) -> "Kernel":
        return self._replace(coef=self.coef * c)

    def profile(self, r: float) -> float:
        """
        Radial profile `Phi(r)`.
        """
        match self.kind:
            case KernelKind.CHAR_SHELL:
                r1, r2 = self.params
                return self.coef * float(r1 <= r <= r2)
            case KernelKind.POWER_DECAY:
                sigma, r0 = self.params
                return self.coef * r**-sigma if r >= r0 else 0.0

        raise ValueError("custom kernels are not radial")

    def majorant(self, r: float) -> float | None:
        """
        Radial majorant of `|Phi|`, `None` if unknown.
        """
        if self.is_radial:
            return abs(self.profile(r))
        if self.custom_majorant is not None:
            return self.custom_majorant(r)
        return None

    def __call__(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.kind is KernelKind.CUSTOM:
            return self.coef * np.asarray(self.fn(points), dtype=float)

        r = hnorm(points)
        match self.kind:
            case KernelKind.CHAR_SHELL:
                return self.coef * self.support.contains(r).astype(float)
            case KernelKind.POWER_DECAY:
                sigma, r0 = self.params
                with np.errstate(divide="ignore"):
                    return np.where(r >= r0, self.coef * r**-sigma, 0.0)

    def integrability(self, dims: GroupDims) -> QuadResult:
        """
        `int |Phi(y)| / |y|_h**Q dy` by the radial reduction of the majorant.

        Raises
        ------
        DivergentIntegralError
            If the integral does not converge.
        ValueError
            If no majorant is known.
        """
        support = self.support
        if self.majorant(max(support.r_lo, 1.0)) is None:
            raise ValueError("kernel has no radial majorant")

        return integrate_radial(
            lambda r: self.majorant(r) / r**dims.Q,
            support.r_lo,
            support.r_hi,
            dims,
            breakpoints=self.breakpoints,
        )
