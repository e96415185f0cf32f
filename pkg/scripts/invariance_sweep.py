"""Sweep random points and vectors through every built-in curvilinear chart.

Reports, per chart, the worst deviation of three invariants after moving
from the Cartesian frame into the chart frame:

* norm_sq of a vector,
* the covector-vector pairing,
* the Kronecker tensor's components.
"""

from __future__ import annotations

import argparse
from dataclasses import asdict, dataclass

import numpy as np

from omtensor.charts import builtin_chart
from omtensor.tensor import COVAR, TensorValue, cartesian_frame, kronecker, make_frame, norm_sq, transform, vector


@dataclass
class SweepConfig:
    samples: int = 1000
    seed: int = 0
    r_min: float = 0.05
    r_max: float = 100.0
    pole_margin: float = 0.01
    scale: float = 10.0


def sample_point(name: str, cfg: SweepConfig, rng) -> list[float]:
    r = rng.uniform(cfg.r_min, cfg.r_max)
    if name == "polar":
        return [r, rng.uniform(-np.pi, np.pi)]
    return [r, rng.uniform(cfg.pole_margin, np.pi - cfg.pole_margin), rng.uniform(-np.pi, np.pi)]


def sweep(name: str, cfg: SweepConfig) -> dict:
    chart = builtin_chart(name)
    rng = np.random.default_rng(cfg.seed)
    worst = {"norm_sq_rel": 0.0, "pairing_rel": 0.0, "kronecker_abs": 0.0}
    delta = kronecker(chart.dim)
    for _ in range(cfg.samples):
        q = sample_point(name, cfg, rng)
        curv = make_frame(chart, q)
        cart = cartesian_frame(curv.ambient_point)
        v = vector(rng.uniform(-cfg.scale, cfg.scale, chart.dim), cart)
        w = TensorValue(chart.dim, (COVAR,), rng.uniform(-cfg.scale, cfg.scale, chart.dim), cart)

        n0 = norm_sq(v, cart)
        n1 = norm_sq(transform(v, curv), curv)
        worst["norm_sq_rel"] = max(worst["norm_sq_rel"], abs(n1 - n0) / max(abs(n0), 1e-300))

        p0 = float(w.components @ v.components)
        p1 = float(transform(w, curv).components @ transform(v, curv).components)
        worst["pairing_rel"] = max(worst["pairing_rel"], abs(p1 - p0) / max(abs(p0), 1.0))

        d = transform(delta.with_frame(cart), curv)
        worst["kronecker_abs"] = max(worst["kronecker_abs"], float(np.abs(d.components - delta.components).max()))
    return worst


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    defaults = SweepConfig()
    for key, val in asdict(defaults).items():
        ap.add_argument(f"--{key.replace('_', '-')}", type=type(val), default=val)
    cfg = SweepConfig(**{k: v for k, v in vars(ap.parse_args(argv)).items()})
    print(f"config: {asdict(cfg)}")
    for name in ("polar", "spherical"):
        stats = sweep(name, cfg)
        print(f"{name:10s} " + "  ".join(f"{k}={v:.2e}" for k, v in stats.items()))


if __name__ == "__main__":
    main()
