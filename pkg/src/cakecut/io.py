"""Exact JSON (de)serialization for profiles, reports, and witnesses.

Every rational travels as a "p/q" string in lowest terms (integers drop the
denominator), and decimal strings like "0.8" are converted exactly on input.
JSON numbers are parsed with Fraction as the float hook, so no value ever
passes through binary floating point.  Serialization is canonical: sorted
keys, fixed separators, trailing newline, which makes outputs byte-identical
across runs with the same inputs.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, IO, Union

from cakecut.cake import (
    Allocation,
    Piece,
    PiecewiseConstantValuation,
    Profile,
)
from cakecut.chains import (
    GainCertificate,
    PropertyCertificate,
    ViolationWitness,
)
from cakecut.properties import PropertyReport


class FormatError(ValueError):
    """Malformed input file; the message names the offending field."""


def rat_str(x: Fraction) -> str:
    return str(x)


def as_rational(value: Any, where: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise FormatError(f"{where}: expected an exact rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"{where}: invalid rational {value!r} ({exc})") from None
    raise FormatError(f"{where}: expected an exact rational, got {type(value).__name__}")


def require_keys(obj: Any, required: set[str], optional: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    missing = required - obj.keys()
    if missing:
        raise FormatError(f"{where}: missing field(s) {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise FormatError(f"{where}: unknown field(s) {sorted(unknown)}")


_require_keys = require_keys


# ---------------------------------------------------------------------------
# valuations / profiles / pieces


def valuation_to_json(v: PiecewiseConstantValuation) -> dict:
    return {
        "breakpoints": [rat_str(b) for b in v.breakpoints],
        "densities": [rat_str(d) for d in v.densities],
    }


def valuation_from_json(obj: Any, where: str) -> PiecewiseConstantValuation:
    _require_keys(obj, {"breakpoints", "densities"}, set(), where)
    if not isinstance(obj["breakpoints"], list) or not isinstance(obj["densities"], list):
        raise FormatError(f"{where}: breakpoints and densities must be arrays")
    points = [as_rational(b, f"{where}.breakpoints[{i}]")
              for i, b in enumerate(obj["breakpoints"])]
    densities = [as_rational(d, f"{where}.densities[{i}]")
                 for i, d in enumerate(obj["densities"])]
    try:
        return PiecewiseConstantValuation.of(points, densities)
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


def profile_to_json(profile: Profile) -> dict:
    return {"agents": [valuation_to_json(v) for v in profile]}


def profile_from_json(obj: Any, where: str = "profile") -> Profile:
    _require_keys(obj, {"agents"}, set(), where)
    agents = obj["agents"]
    if not isinstance(agents, list) or len(agents) < 2:
        raise FormatError(f"{where}.agents: need an array of at least two agents")
    return Profile.of(
        valuation_from_json(a, f"{where}.agents[{i}]") for i, a in enumerate(agents))


def piece_to_json(piece: Piece) -> list:
    return [[rat_str(iv.lo), rat_str(iv.hi)] for iv in piece.intervals]


def allocation_to_json(allocation: Allocation, profile: Profile) -> dict:
    return {
        "pieces": [piece_to_json(p) for p in allocation.pieces],
        "discarded": piece_to_json(allocation.discarded),
        "values": [rat_str(v.value(allocation.pieces[i]))
                   for i, v in enumerate(profile)],
    }


# ---------------------------------------------------------------------------
# reports, certificates, witnesses


def report_to_json(report: PropertyReport) -> dict:
    return {
        "proportionality_deficit": rat_str(report.proportionality_deficit),
        "envy": rat_str(report.envy),
        "wasted_measure": rat_str(report.wasted_measure),
        "contiguous": report.contiguous,
    }


def report_from_json(obj: Any, where: str) -> PropertyReport:
    _require_keys(obj, {"proportionality_deficit", "envy", "wasted_measure",
                        "contiguous"}, set(), where)
    return PropertyReport(
        as_rational(obj["proportionality_deficit"], f"{where}.proportionality_deficit"),
        as_rational(obj["envy"], f"{where}.envy"),
        as_rational(obj["wasted_measure"], f"{where}.wasted_measure"),
        bool(obj["contiguous"]),
    )


def gain_certificate_to_json(cert: GainCertificate) -> dict:
    return {
        "kind": "gain",
        "mechanism": cert.mechanism,
        "profile": profile_to_json(cert.profile),
        "agent": cert.agent,
        "misreport": valuation_to_json(cert.misreport),
        "truthful_value": rat_str(cert.truthful_value),
        "deviated_value": rat_str(cert.deviated_value),
        "gain": rat_str(cert.gain),
    }


def property_certificate_to_json(cert: PropertyCertificate) -> dict:
    return {
        "kind": "report",
        "mechanism": cert.mechanism,
        "profile": profile_to_json(cert.profile),
        "report": report_to_json(cert.report),
    }


def certificate_from_json(obj: Any, where: str
                          ) -> Union[GainCertificate, PropertyCertificate]:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise FormatError(f"{where}: expected a certificate object with a kind")
    if obj["kind"] == "gain":
        _require_keys(obj, {"kind", "mechanism", "profile", "agent", "misreport",
                            "truthful_value", "deviated_value", "gain"}, set(), where)
        if not isinstance(obj["agent"], int):
            raise FormatError(f"{where}.agent: expected an integer")
        return GainCertificate(
            obj["mechanism"],
            profile_from_json(obj["profile"], f"{where}.profile"),
            obj["agent"],
            valuation_from_json(obj["misreport"], f"{where}.misreport"),
            as_rational(obj["truthful_value"], f"{where}.truthful_value"),
            as_rational(obj["deviated_value"], f"{where}.deviated_value"),
            as_rational(obj["gain"], f"{where}.gain"),
        )
    if obj["kind"] == "report":
        _require_keys(obj, {"kind", "mechanism", "profile", "report"}, set(), where)
        return PropertyCertificate(
            obj["mechanism"],
            profile_from_json(obj["profile"], f"{where}.profile"),
            report_from_json(obj["report"], f"{where}.report"),
        )
    raise FormatError(f"{where}.kind: unknown certificate kind {obj['kind']!r}")


def witness_to_json(witness: ViolationWitness) -> dict:
    if isinstance(witness.certificate, GainCertificate):
        cert = gain_certificate_to_json(witness.certificate)
    else:
        cert = property_certificate_to_json(witness.certificate)
    return {
        "chain": witness.chain,
        "mechanism": witness.mechanism,
        "violated": witness.violated,
        "epsilon": rat_str(witness.epsilon),
        "certificate": cert,
        "profiles": [profile_to_json(p) for p in witness.profiles],
        "parameters": {k: rat_str(v) for k, v in witness.parameters},
    }


def witness_from_json(obj: Any, where: str = "witness") -> ViolationWitness:
    _require_keys(obj, {"chain", "mechanism", "violated", "epsilon",
                        "certificate", "profiles", "parameters"}, set(), where)
    parameters = tuple(sorted(
        (k, as_rational(v, f"{where}.parameters.{k}"))
        for k, v in obj["parameters"].items()))
    return ViolationWitness(
        obj["chain"],
        obj["mechanism"],
        obj["violated"],
        as_rational(obj["epsilon"], f"{where}.epsilon"),
        certificate_from_json(obj["certificate"], f"{where}.certificate"),
        tuple(profile_from_json(p, f"{where}.profiles[{i}]")
              for i, p in enumerate(obj["profiles"])),
        parameters,
    )


# ---------------------------------------------------------------------------
# canonical JSON plumbing


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_json(stream_or_path: Union[str, IO[str]]) -> Any:
    """Load JSON with floats parsed exactly (0.8 becomes 4/5)."""
    if isinstance(stream_or_path, str):
        with open(stream_or_path) as fh:
            return json.load(fh, parse_float=Fraction)
    return json.load(stream_or_path, parse_float=Fraction)
