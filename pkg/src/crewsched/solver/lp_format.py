"""Plain-text LP export and a companion parser.

The emitted format follows the widely understood LP-file conventions
(objective section, named constraint rows, a Binaries declaration listing
every variable in index order) so external solvers can cross-check any model
this package builds. parse_lp_text round-trips export_lp_text exactly.
"""

from __future__ import annotations

import re

from ..errors import FormatError
from .model import EQ, GE, LE, MAXIMIZE, MINIMIZE, IpInstance, LinearConstraint

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN_RE = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?P<coeff>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)?\s*"
    r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
)


def _fmt(value: float) -> str:
    return repr(float(value))


def _expr(terms, names) -> str:
    if not terms:
        return ""
    parts = []
    for k, (idx, coeff) in enumerate(terms):
        sign = "-" if coeff < 0 else "+"
        mag = _fmt(abs(coeff))
        if k == 0:
            parts.append((f"- {mag}" if coeff < 0 else mag) + f" {names[idx]}")
        else:
            parts.append(f"{sign} {mag} {names[idx]}")
    return " ".join(parts)


def export_lp_text(ip: IpInstance) -> str:
    """Emit the instance as LP-format text; all variables are declared binary."""
    names = [ip.name_of(j) for j in range(ip.num_vars)]
    lines = ["\\ crewsched 0/1 program export"]
    lines.append("Maximize" if ip.sense == MAXIMIZE else "Minimize")
    lines.append(" obj: " + _expr(ip.objective, names))
    lines.append("Subject To")
    for r, con in enumerate(ip.constraints):
        lines.append(f" c{r}: " + _expr(con.terms, names) + f" {con.relation} {_fmt(con.rhs)}")
    lines.append("Binaries")
    for name in names:
        lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def _parse_terms(text: str, line_no: int) -> list[tuple[str, float]]:
    terms: list[tuple[str, float]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise FormatError(f"line {line_no}: cannot parse expression near {text[pos:]!r}")
        sign = -1.0 if match.group("sign") == "-" else 1.0
        coeff = float(match.group("coeff")) if match.group("coeff") else 1.0
        terms.append((match.group("name"), sign * coeff))
        pos = match.end()
    return terms


def parse_lp_text(text: str) -> IpInstance:
    """Parse LP-format text produced by export_lp_text (or close dialects)."""
    sense = None
    objective_parts: list[str] = []
    constraint_lines: list[tuple[int, str]] = []
    binaries: list[str] = []
    section = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\")[0].strip()
        if not line:
            continue
        lowered = line.lower()
        if lowered in ("maximize", "maximise", "max"):
            sense, section = MAXIMIZE, "objective"
            continue
        if lowered in ("minimize", "minimise", "min"):
            sense, section = MINIMIZE, "objective"
            continue
        if lowered in ("subject to", "st", "s.t.", "such that"):
            section = "constraints"
            continue
        if lowered in ("binaries", "binary", "bin"):
            section = "binaries"
            continue
        if lowered in ("bounds", "generals", "general"):
            section = "skip"
            continue
        if lowered == "end":
            break
        if section == "objective":
            objective_parts.append(line)
        elif section == "constraints":
            constraint_lines.append((line_no, line))
        elif section == "binaries":
            binaries.extend(_NAME_RE.findall(line))
        elif section == "skip":
            continue
        else:
            raise FormatError(f"line {line_no}: content outside any section: {line!r}")

    if sense is None:
        raise FormatError("missing objective sense (Maximize/Minimize)")
    if not binaries:
        raise FormatError("missing Binaries section")
    index = {name: j for j, name in enumerate(binaries)}
    if len(index) != len(binaries):
        raise FormatError("duplicate variable name in Binaries")

    def to_indexed(named_terms, line_no):
        out = []
        for name, coeff in named_terms:
            if name not in index:
                raise FormatError(f"line {line_no}: undeclared variable {name!r}")
            out.append((index[name], coeff))
        return tuple(out)

    objective_text = " ".join(objective_parts)
    objective_text = re.sub(r"^\s*\w+\s*:", "", objective_text)
    objective = to_indexed(_parse_terms(objective_text, 0), 0)

    constraints = []
    for line_no, line in constraint_lines:
        body = re.sub(r"^\s*\w+\s*:", "", line)
        rel_match = re.search(r"(<=|>=|=)", body)
        if rel_match is None:
            raise FormatError(f"line {line_no}: constraint missing relation")
        relation = rel_match.group(1)
        lhs, rhs_text = body[: rel_match.start()], body[rel_match.end() :]
        try:
            rhs = float(rhs_text.strip())
        except ValueError as exc:
            raise FormatError(f"line {line_no}: bad right-hand side {rhs_text!r}") from exc
        terms = to_indexed(_parse_terms(lhs, line_no), line_no)
        constraints.append(LinearConstraint(terms=terms, relation=relation, rhs=rhs))

    return IpInstance(
        num_vars=len(binaries),
        objective=objective,
        sense=sense,
        constraints=tuple(constraints),
        var_names=tuple(binaries),
    )
