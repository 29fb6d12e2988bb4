"""
End-to-end gate experiments: compress, build the control, propagate, measure
fidelities and assemble the truncation-error certificate.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, models
from .config import ScenarioConfig, build_control
from .propagate import Trajectory, compress, gate_fidelities, propagate, two_sided_deviation

logger = logging.getLogger(__name__)

REPORT_VERSION = 1


@dataclass
class GateReport:
    name: str
    N: int
    model: dict
    fidelity_matrix: list
    transitions: list
    l1_total: float
    budget: float
    budget_exceeded: bool
    total_duration: float
    commutator_sup: float
    commutator_two_sided: float
    certificate: bounds.ErrorCertificate
    config: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def fidelities(self) -> list[float]:
        return [t["fidelity"] for t in self.transitions]

    def to_dict(self) -> dict:
        data = asdict(self)
        data["certificate"] = self.certificate.to_dict()
        data["version"] = REPORT_VERSION
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "GateReport":
        data = dict(data)
        data.pop("version", None)
        data["certificate"] = bounds.ErrorCertificate.from_dict(data["certificate"])
        report = cls(**data)
        for f in report.fidelities + [x for row in report.fidelity_matrix for x in row]:
            if not -1e-12 <= f <= 1 + 1e-9:
                raise ValueError(f"fidelity {f} outside [0, 1]")
        return report


def load_report(path) -> GateReport:
    """Read a JSON report, checking the certificate total against its parts."""
    return GateReport.from_dict(json.loads(Path(path).read_text()))


def certificate_for(
    config: ScenarioConfig,
    model: models.QuantumModel,
    K: float,
    comm_sup: float,
) -> bounds.ErrorCertificate:
    """Truncation certificate for ``model`` at the configured ``N``.

    ``K`` is the L1 norm entering the estimate. For the oscillator the
    factorial chain is used and the commutator term is zero; for the well the
    tail and ``||B||`` scale with the model's coupling scale.
    """
    N = int(config.N)
    if model.kind is models.ModelKind.PERTURBED_OSCILLATOR:
        chain = bounds.oscillator_truncation_bound(N, K)
        tail = chain / K if K > 0 else 0.0
        return bounds.total_error_bound(
            K, tail, 0.0, 0.0, N=N,
            provenance=(
                f"oscillator factorial chain at N={N}, K={K!r}: "
                "tail_term = chain bound / K, no commutator term"
            ),
        )
    form = config.certificate.get("tail_form", "third_column")
    tail = bounds.well_projected_tail_bound(N, form) * model.coupling_scale
    note = (
        f"well: tail ({form} form) at N={N} times coupling scale {model.coupling_scale!r}; "
        f"||B|| <= {model.b_norm_bound!r}; deviation sup {comm_sup!r}"
    )
    return bounds.total_error_bound(K, tail, comm_sup, model.b_norm_bound, N=N, provenance=note)


def run_scenario(config: ScenarioConfig) -> tuple[GateReport, Trajectory]:
    start = time.perf_counter()
    model = config.build_model()
    system = compress(model, int(config.N))
    control = build_control(config, model)
    budget = config.budget_or_default
    l1 = control.l1
    exceeded = l1 > budget
    if exceeded:
        logger.warning("control L1 norm %.6g exceeds the budget K = %.6g", l1, budget)
    traj = propagate(system, control, config.initial, config.sample_every)
    fid = gate_fidelities(traj, config.target)
    comm = traj.commutator_sup
    cert = certificate_for(config, model, l1, comm)
    report = GateReport(
        name=config.name,
        N=int(config.N),
        model={
            "kind": model.kind.value,
            "eta": model.eta,
            "eigenvalue_scale": model.eigenvalue_scale,
            "coupling_scale": model.coupling_scale,
            "perturbation": model.perturbation.value,
        },
        fidelity_matrix=fid.moduli.tolist(),
        transitions=[{"from": j, "to": s, "fidelity": f} for j, s, f in fid.transitions],
        l1_total=l1,
        budget=budget,
        budget_exceeded=bool(exceeded),
        total_duration=control.total_duration,
        commutator_sup=comm,
        commutator_two_sided=two_sided_deviation(comm),
        certificate=cert,
        config=config.to_dict(),
    )
    report.wall_time = time.perf_counter() - start
    return report, traj


def certify(
    config: ScenarioConfig, commutator_sup: float | None = None, K: float | None = None
) -> dict:
    """Bounds-only certificate for a scenario; nothing is propagated.

    ``K`` defaults to the configured a priori budget and the deviation sup to
    ``certificate.assumed_commutator_sup`` (zero if absent).
    """
    model = config.build_model()
    K = config.budget_or_default if K is None else float(K)
    if commutator_sup is None:
        commutator_sup = float(config.certificate.get("assumed_commutator_sup", 0.0))
    l1 = build_control(config, model).l1
    cert = certificate_for(config, model, K, commutator_sup)
    out = {
        "name": config.name,
        "N": int(config.N),
        "K": K,
        "control_l1": l1,
        "control_within_budget": l1 <= K,
        "certificate": cert.to_dict(),
    }
    eps = config.certificate.get("eps")
    if eps is not None:
        if model.kind is models.ModelKind.PERTURBED_OSCILLATOR:
            out["minimal_N"] = bounds.minimal_oscillator_dimension(K, float(eps))
        else:
            form = config.certificate.get("tail_form", "third_column")
            out["minimal_N"] = bounds.minimal_well_dimension(K * model.coupling_scale, float(eps), form)
        out["eps"] = float(eps)
    return out


def csv_header(N: int) -> list[str]:
    return ["t"] + [f"c{i}_abs" for i in range(1, min(3, N) + 1)]


def write_trajectory_csv(path, times, states, N: int) -> None:
    """Moduli of the leading coordinates of one trajectory, 12 significant digits."""
    ncol = min(3, N)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header(N))
        for t, psi in zip(times, states):
            writer.writerow([f"{t:.12g}"] + [f"{abs(c):.12g}" for c in psi[:ncol]])


def emit_outputs(traj: Trajectory, report: GateReport, directory, stem: str | None = None) -> list[Path]:
    """Write one CSV per initial state and the JSON report; return the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = stem or report.name
    written = []
    for label, states in zip(traj.labels, traj.states):
        path = directory / f"{stem}_{label}.csv"
        write_trajectory_csv(path, traj.sample_times, states, traj.N)
        written.append(path)
    path = directory / f"{stem}_report.json"
    path.write_text(report.to_json())
    written.append(path)
    return written


def report_without_timing(report: GateReport) -> str:
    data = report.to_dict()
    data.pop("wall_time")
    return json.dumps(data, sort_keys=True)


def numeric_summary(report: GateReport) -> dict:
    """The handful of numbers printed by ``simulate``."""
    return {
        "name": report.name,
        "fidelities": report.fidelities,
        "l1_total": report.l1_total,
        "commutator_sup": report.commutator_sup,
        "certificate_total": report.certificate.total,
        "wall_time": round(report.wall_time, 3),
    }


def is_finite_report(report: GateReport) -> bool:
    return all(math.isfinite(f) for f in report.fidelities) and bool(
        np.all(np.isfinite(report.fidelity_matrix))
    )
