"""Versioned JSON report written by ``gaussent analyze``."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = "1"


def _clean(value):
    """JSON-safe copy: NaN/inf become None, tuples become lists, numpy scalars floats."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    try:
        value = float(value)
    except (TypeError, ValueError):
        return str(value)
    return value if math.isfinite(value) else None


def _interval(est):
    return {"point": est.point, "ci_low": est.ci_low, "ci_high": est.ci_high,
            "sigma": est.sigma, "replicates": est.bootstrap_replicates}


@dataclass(frozen=True)
class ReportDocument:
    inputs: dict
    observables: dict
    beta: dict
    spectrum: dict
    state_class: str
    log_negativity: dict
    lambda_minus: dict
    witness: dict
    thermal_check: dict
    warnings: list = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_analysis(cls, result, inputs: dict) -> "ReportDocument":
        rep = result.report
        spec = rep.spectrum
        est = result.estimates
        observables = {name: _interval(est[name]) for name in est.intervals}
        doc = cls(
            inputs=inputs,
            observables=observables,
            beta={"beta_plus": rep.beta.beta_plus, "beta_minus": rep.beta.beta_minus,
                  "identified_pair_moment": rep.identified_pair_moment,
                  "identified_coherence": rep.identified_coherence},
            spectrum={"lambda_minus": spec.lambda_minus,
                      "lambda_prime_minus": spec.lambda_prime_minus,
                      "det_sigma": spec.det_sigma, "Delta": spec.Delta,
                      "Delta_prime": spec.Delta_prime, "complex_branch": spec.complex_branch},
            state_class=str(rep.state_class),
            log_negativity={"value": rep.log_negativity, **_interval(result.log_negativity)},
            lambda_minus={**_interval(result.lambda_minus),
                          "straddles_border": result.straddles_border},
            witness={"verdict": str(result.witness.verdict), "g2_E": result.witness.g2_E,
                     "g2_S": result.witness.g2_S, "measured_g2": result.witness.measured_g2},
            thermal_check={"passed": result.thermal.passed,
                           "override_used": result.override_used,
                           "tolerance_sigma": result.thermal.tolerance_sigma,
                           "theta_tolerance": result.tau},
            warnings=list(result.warnings),
        )
        return cls.from_dict(doc.to_dict())

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        data = dict(data)
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {version!r}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))
