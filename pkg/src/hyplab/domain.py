"""Star-shaped planar domains given by a polar radial graph rho(theta).

A domain is stored as a truncated Fourier series

    rho(theta) = a0 + sum_k (c_k cos(k theta) + s_k sin(k theta)),

which keeps boundary derivatives exact and makes JSON round-trips lossless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_MODES = 32

_VALIDATION_SAMPLES = 2048


@dataclass(frozen=True)
class StarDomain:
    """Radial-graph domain with Fourier boundary rho(theta) > 0."""

    a0: float
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    label: str | None = None

    def __post_init__(self):
        if not np.isfinite(self.a0) or self.a0 <= 0.0:
            raise ValueError("mean radius a0 must be positive and finite")
        if len(self.cos_coeffs) > MAX_MODES or len(self.sin_coeffs) > MAX_MODES:
            raise ValueError(f"Fourier truncation exceeds {MAX_MODES} modes")
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(s) for s in self.sin_coeffs))
        theta = np.linspace(0.0, 2.0 * np.pi, _VALIDATION_SAMPLES, endpoint=False)
        if np.min(self.rho(theta)) <= 0.0:
            raise ValueError("boundary radius rho(theta) must be positive everywhere")

    @classmethod
    def ball(cls, radius: float, label: str | None = None) -> "StarDomain":
        return cls(a0=radius, label=label)

    @property
    def kind(self) -> str:
        if any(self.cos_coeffs) or any(self.sin_coeffs):
            return "polar-fourier"
        return "ball"

    @property
    def is_ball(self) -> bool:
        return self.kind == "ball"

    def _series(self, theta, derivative: int):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.a0 if derivative == 0 else 0.0)
        for k, c in enumerate(self.cos_coeffs, start=1):
            if c != 0.0:
                if derivative == 0:
                    out += c * np.cos(k * theta)
                elif derivative == 1:
                    out += -c * k * np.sin(k * theta)
                else:
                    out += -c * k * k * np.cos(k * theta)
        for k, s in enumerate(self.sin_coeffs, start=1):
            if s != 0.0:
                if derivative == 0:
                    out += s * np.sin(k * theta)
                elif derivative == 1:
                    out += s * k * np.cos(k * theta)
                else:
                    out += -s * k * k * np.sin(k * theta)
        return out

    def rho(self, theta):
        """Boundary radius at angle(s) theta."""
        return self._series(theta, 0)

    def rho_prime(self, theta):
        return self._series(theta, 1)

    def rho_second(self, theta):
        return self._series(theta, 2)

    def to_dict(self) -> dict:
        if self.is_ball:
            d = {"model": "ball", "radius": self.a0}
        else:
            d = {
                "model": "polar-fourier",
                "a0": self.a0,
                "cos": list(self.cos_coeffs),
                "sin": list(self.sin_coeffs),
            }
        if self.label is not None:
            d["label"] = self.label
        return d


def domain_from_dict(data: dict) -> StarDomain:
    """Parse the JSON domain-file schema; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise ValueError("domain file must contain a JSON object")
    model = data.get("model")
    if model == "ball":
        allowed = {"model", "radius", "label"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown keys in domain file: {sorted(unknown)}")
        if "radius" not in data:
            raise ValueError("ball domain requires 'radius'")
        radius = float(data["radius"])
        if radius <= 0:
            raise ValueError("radius must be positive")
        return StarDomain.ball(radius, label=data.get("label"))
    if model == "polar-fourier":
        allowed = {"model", "a0", "cos", "sin", "label"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown keys in domain file: {sorted(unknown)}")
        if "a0" not in data:
            raise ValueError("polar-fourier domain requires 'a0'")
        a0 = float(data["a0"])
        if a0 <= 0:
            raise ValueError("a0 must be positive")
        return StarDomain(
            a0=a0,
            cos_coeffs=tuple(data.get("cos", ())),
            sin_coeffs=tuple(data.get("sin", ())),
            label=data.get("label"),
        )
    raise ValueError(f"unknown domain model: {model!r}")
