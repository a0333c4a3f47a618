"""The analysis report bundling every module's output for one pencil."""

from __future__ import annotations

from dataclasses import dataclass, field

from .commutativity import commute_check
from .defects import DefectProfile, defect_profile
from .io import SCHEMA_VERSION, input_digest
from .pencil import Pencil
from .reduction import PencilScale, irreducible_core, normality_check
from .spectrum import core_spectrum, resolvent_member, sample_lambdas
from .subspace import DEFAULT_TOL, Tolerance


@dataclass
class AnalysisReport:
    schema_version: int = SCHEMA_VERSION
    input_digest: str | None = None
    shape: list | None = None
    tolerance: dict | None = None
    chain: list | None = None
    defects: DefectProfile | dict | None = None
    normality: dict | None = None
    commutativity: dict | None = None
    resolvent_samples: list | None = None
    core_spectrum: list | None = None
    ode_extract: dict | None = None
    saddle: dict | None = None
    reduce: dict | None = None
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {}
        for key in self.__dataclass_fields__:
            val = getattr(self, key)
            if val is None or (isinstance(val, list) and not val and key != "core_spectrum"):
                continue
            out[key] = val.to_dict() if hasattr(val, "to_dict") else val
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        kw = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        if isinstance(kw.get("defects"), dict):
            kw["defects"] = DefectProfile.from_dict(kw["defects"])
        return cls(**kw)


def tolerance_dict(tol: Tolerance) -> dict:
    return {"rel": tol.rel, "abs_floor": tol.abs_floor}


def analyze(p: Pencil, tol: Tolerance = DEFAULT_TOL, max_steps: int | None = None, seed: int = 0) -> AnalysisReport:
    """Run every analysis on ``p``.  Deterministic for a fixed ``seed``."""
    sc = PencilScale.of(p)
    rep = AnalysisReport(input_digest=input_digest(p), shape=list(p.shape), tolerance=tolerance_dict(tol))
    chain = irreducible_core(p, tol, sc)
    rep.chain = [st.summary() for st in chain]
    prof = defect_profile(p, tol, max_steps, sc)
    rep.defects = prof
    rep.normality = normality_check(p, tol, sc).to_dict()
    cert = commute_check(p, tol)
    rep.commutativity = cert.to_dict()
    rep.resolvent_samples = [
        resolvent_member(p, lam, tol, sc).to_dict() for lam in sample_lambdas(p, seed=seed)
    ]
    if prof.regular:
        rep.core_spectrum = [complex(z) for z in core_spectrum(p, tol)]
    rep.warnings = [f"marginal pivot: {m}" for m in prof.marginal]
    if prof.termination != "exhausted":
        rep.warnings.append("defect sequences truncated at max_steps")
    if not cert.equivalent:
        rep.warnings.append("mixed reductions not identified within tolerance")
    if not rep.normality["normal"]:
        rep.warnings.append("normality identities fail within tolerance")
    return rep


def text_summary(rep: AnalysisReport) -> str:
    lines = [f"pencil {rep.shape[0]}x{rep.shape[1]}  digest {rep.input_digest[:16]}"] if rep.shape else []
    d = rep.defects
    if d is not None:
        d = d.to_dict() if hasattr(d, "to_dict") else d
        lines.append(f"alpha     {d['alpha']}")
        lines.append(f"beta_obs  {d['beta_obs']}")
        lines.append(f"beta_ctrl {d['beta_ctrl']}")
        lines.append(f"regular   {d['regular']}")
    if rep.chain is not None:
        kinds = " ".join(s["kind"][:4] for s in rep.chain) or "(none)"
        lines.append(f"chain     {kinds}")
    if rep.commutativity is not None:
        lines.append(f"commute   equivalent={rep.commutativity['equivalent']}")
    if rep.core_spectrum is not None:
        vals = [complex(*z) if isinstance(z, list) else complex(z) for z in rep.core_spectrum]
        ev = ", ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in vals)
        lines.append(f"spectrum  {{{ev}}}")
    for w in rep.warnings:
        lines.append(f"warning   {w}")
    return "\n".join(lines)
