"""Reader and writer for ``.sam`` design files.

A design file is a base device description followed by statistical
annotations, one statement per line::

    # cantilever, 2 um wide, calibrated to 50 kHz
    device cantilever calib_f=1.7678e7
    param w nominal=2e-6 dist=gaussian sigma=0.1e-6
    param l nominal=100e-6 dist=none
    bind w = w
    bind l = l
    metric resonant_frequency
    spec resonant_frequency ge 49e3

Statements:

``device <kind> [option=<real> ...]``
    ``kind`` is ``cantilever`` (option ``calib_f``), ``pressure_sensor`` or
    ``linear`` (options ``c<k>`` coefficients and ``offset``).
``param <name> nominal=<real> dist=<kind> [...]``
    ``dist=none``; ``dist=gaussian sigma=``; ``dist=uniform lo= hi=`` or
    ``dist=uniform halfwidth=``; ``dist=exponential rate= [offset=]``.
``bind <field> = <param-name | real>``
    Unbound device fields keep the device defaults.
``metric <name>``
``spec <metric> <ge|le> <real>``

``#`` starts a comment.  Whitespace around ``=`` is optional.  Keywords
are lowercase and case-sensitive.  Every error carries the 1-based line
(and column) of the offending statement.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .devices import DEVICE_KINDS
from .distributions import DistributionError, Exponential, Fixed, Gaussian, Uniform
from .problem import DesignProblem, ProblemError, Relation, Specification, StatisticalParameter


class NetlistParseError(ValueError):
    def __init__(self, line: int, reason: str, column: int = 1):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column}: {reason}")


class UnknownStatementError(NetlistParseError):
    pass


class UnknownDeviceError(NetlistParseError):
    pass


class UnknownDistributionError(NetlistParseError):
    pass


class DuplicateParameterError(NetlistParseError):
    pass


class UndeclaredMetricError(NetlistParseError):
    pass


class UnknownMetricError(NetlistParseError):
    pass


class MalformedNumberError(NetlistParseError):
    pass


class MalformedStatementError(NetlistParseError):
    pass


class InvalidParameterError(NetlistParseError):
    pass


class BindingError(NetlistParseError):
    pass


_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN_RE = re.compile(r"[^\s=]+|=")

DIST_KEYS = {
    "none": set(),
    "gaussian": {"sigma"},
    "uniform": {"lo", "hi", "halfwidth"},
    "exponential": {"rate", "offset"},
}


@dataclass
class _Tok:
    text: str
    col: int
    value: Optional[str] = None  # set for key=value tokens
    value_col: int = 0

    @property
    def is_pair(self):
        return self.value is not None


def _tokenize(line: str, lineno: int) -> list:
    raw = [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(line)]
    toks = []
    i = 0
    while i < len(raw):
        text, col = raw[i]
        if text == "=":
            raise MalformedStatementError(lineno, "'=' without a key", col)
        if i + 1 < len(raw) and raw[i + 1][0] == "=":
            if i + 2 >= len(raw) or raw[i + 2][0] == "=":
                raise MalformedStatementError(lineno, f"missing value after '{text}='", col)
            toks.append(_Tok(text, col, raw[i + 2][0], raw[i + 2][1]))
            i += 3
        else:
            toks.append(_Tok(text, col))
            i += 1
    return toks


def _number(text: str, lineno: int, col: int) -> float:
    if not _NUMBER_RE.fullmatch(text):
        raise MalformedNumberError(lineno, f"malformed number {text!r}", col)
    value = float(text)
    if value in (float("inf"), float("-inf")):
        raise MalformedNumberError(lineno, f"number out of range {text!r}", col)
    return value


def _ident(tok: _Tok, lineno: int, what: str) -> str:
    if tok.is_pair or not _IDENT_RE.fullmatch(tok.text):
        raise MalformedStatementError(lineno, f"expected {what}, got {tok.text!r}", tok.col)
    return tok.text


def _pairs(toks, lineno) -> dict:
    out = {}
    for tok in toks:
        if not tok.is_pair:
            raise MalformedStatementError(lineno, f"expected key=value, got {tok.text!r}", tok.col)
        if tok.text in out:
            raise MalformedStatementError(lineno, f"repeated key {tok.text!r}", tok.col)
        out[tok.text] = tok
    return out


def _parse_param(toks, lineno) -> StatisticalParameter:
    if len(toks) < 2:
        raise MalformedStatementError(lineno, "param needs a name, nominal= and dist=", toks[0].col)
    name = _ident(toks[1], lineno, "parameter name")
    pairs = _pairs(toks[2:], lineno)
    for key in ("nominal", "dist"):
        if key not in pairs:
            raise MalformedStatementError(lineno, f"param {name!r} is missing {key}=", toks[1].col)
    nominal = _number(pairs["nominal"].value, lineno, pairs["nominal"].value_col)
    dist_tok = pairs["dist"]
    kind = dist_tok.value
    if kind not in DIST_KEYS:
        raise UnknownDistributionError(lineno, f"unknown distribution kind {kind!r}", dist_tok.value_col)
    extra = {k: v for k, v in pairs.items() if k not in ("nominal", "dist")}
    for key, tok in extra.items():
        if key not in DIST_KEYS[kind]:
            raise MalformedStatementError(lineno, f"key {key!r} not valid for dist={kind}", tok.col)
    vals = {k: _number(t.value, lineno, t.value_col) for k, t in extra.items()}

    def need(*keys):
        for key in keys:
            if key not in vals:
                raise MalformedStatementError(lineno, f"dist={kind} requires {key}=", dist_tok.col)

    try:
        if kind == "none":
            dist = Fixed(nominal)
        elif kind == "gaussian":
            need("sigma")
            dist = Gaussian(nominal, vals["sigma"])
        elif kind == "uniform":
            if "halfwidth" in vals:
                if "lo" in vals or "hi" in vals:
                    raise MalformedStatementError(
                        lineno, "give either halfwidth= or lo=/hi=, not both", dist_tok.col
                    )
                h = vals["halfwidth"]
                dist = Uniform(nominal - h, nominal + h)
            else:
                need("lo", "hi")
                dist = Uniform(vals["lo"], vals["hi"])
        else:
            need("rate")
            dist = Exponential(vals["rate"], vals.get("offset", 0.0))
        return StatisticalParameter(name, nominal, dist)
    except (DistributionError, ProblemError) as exc:
        raise InvalidParameterError(lineno, str(exc), toks[1].col) from None


def parse(text: str) -> DesignProblem:
    """Parse design-file text into a validated :class:`DesignProblem`."""
    device = None  # (kind, options, lineno)
    params: list = []
    param_lines: dict = {}
    bindings: dict = {}
    bind_lines: dict = {}
    metrics: list = []
    metric_lines: dict = {}
    specs: list = []
    lines = [ln.rstrip("\r") for ln in text.split("\n")]
    if lines and lines[-1] == "":
        lines.pop()

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        toks = _tokenize(line, lineno)
        head = toks[0]
        if head.is_pair:
            raise UnknownStatementError(lineno, f"unknown statement {head.text!r}", head.col)
        kw = head.text

        if kw == "device":
            if device is not None:
                raise MalformedStatementError(
                    lineno, f"second device statement (first at line {device[2]})", head.col
                )
            if len(toks) < 2:
                raise MalformedStatementError(lineno, "device needs a kind", head.col)
            kind_name = _ident(toks[1], lineno, "device kind")
            if kind_name not in DEVICE_KINDS:
                raise UnknownDeviceError(lineno, f"unknown device kind {kind_name!r}", toks[1].col)
            kind = DEVICE_KINDS[kind_name]
            options = {}
            for key, tok in _pairs(toks[2:], lineno).items():
                if not kind.has_option(key):
                    raise MalformedStatementError(
                        lineno, f"device {kind_name!r} has no option {key!r}", tok.col
                    )
                options[key] = _number(tok.value, lineno, tok.value_col)
            device = (kind_name, options, lineno)

        elif kw == "param":
            p = _parse_param(toks, lineno)
            if p.name in param_lines:
                raise DuplicateParameterError(
                    lineno,
                    f"duplicate parameter {p.name!r} (first declared at line {param_lines[p.name]})",
                    toks[1].col,
                )
            param_lines[p.name] = lineno
            params.append(p)

        elif kw == "bind":
            if len(toks) != 2 or not toks[1].is_pair:
                raise MalformedStatementError(lineno, "expected 'bind <field> = <param|real>'", head.col)
            tok = toks[1]
            fld = _ident(_Tok(tok.text, tok.col), lineno, "device field")
            if fld in bindings:
                raise BindingError(lineno, f"field {fld!r} bound twice", tok.col)
            if _IDENT_RE.fullmatch(tok.value):
                bindings[fld] = tok.value
            else:
                bindings[fld] = _number(tok.value, lineno, tok.value_col)
            bind_lines[fld] = (lineno, tok)

        elif kw == "metric":
            if len(toks) != 2:
                raise MalformedStatementError(lineno, "expected 'metric <name>'", head.col)
            name = _ident(toks[1], lineno, "metric name")
            if name in metric_lines:
                raise MalformedStatementError(lineno, f"metric {name!r} declared twice", toks[1].col)
            metric_lines[name] = (lineno, toks[1].col)
            metrics.append(name)

        elif kw == "spec":
            if len(toks) != 4:
                raise MalformedStatementError(lineno, "expected 'spec <metric> <ge|le> <real>'", head.col)
            metric = _ident(toks[1], lineno, "metric name")
            rel = toks[2]
            if rel.is_pair or rel.text not in ("ge", "le"):
                raise MalformedStatementError(lineno, f"relation must be ge or le, got {rel.text!r}", rel.col)
            if toks[3].is_pair:
                raise MalformedStatementError(lineno, "spec bound must be a number", toks[3].col)
            bound = _number(toks[3].text, lineno, toks[3].col)
            specs.append((Specification(metric, Relation(rel.text), bound), lineno, toks[1].col))

        else:
            raise UnknownStatementError(lineno, f"unknown statement {kw!r}", head.col)

    if device is None:
        raise MalformedStatementError(max(1, len(lines)), "no device statement")
    kind_name, options, _ = device
    kind = DEVICE_KINDS[kind_name]
    for fld, (lineno, tok) in bind_lines.items():
        if not kind.has_field(fld):
            raise BindingError(lineno, f"device {kind_name!r} has no field {fld!r}", tok.col)
        target = bindings[fld]
        if isinstance(target, str) and target not in param_lines:
            raise BindingError(lineno, f"binding references undeclared parameter {target!r}", tok.value_col)
    for name, (lineno, col) in metric_lines.items():
        if name not in kind.metrics:
            raise UnknownMetricError(lineno, f"device {kind_name!r} has no metric {name!r}", col)
        if name == "resonant_frequency" and not options.get("calib_f", 0.0) > 0:
            raise UnknownMetricError(
                lineno, "resonant_frequency needs a positive calib_f on the device line", col
            )
    for spec, lineno, col in specs:
        if spec.metric not in metric_lines:
            raise UndeclaredMetricError(lineno, f"spec references undeclared metric {spec.metric!r}", col)
    try:
        return DesignProblem(
            device=kind_name,
            parameters=params,
            bindings=bindings,
            metrics=metrics,
            specs=[s for s, _, _ in specs],
            options=options,
        )
    except ProblemError as exc:  # pragma: no cover - the checks above should catch everything
        raise MalformedStatementError(device[2], str(exc)) from None


def _fmt(x: float) -> str:
    return repr(float(x))


def _param_line(p: StatisticalParameter) -> str:
    d = p.dist
    head = f"param {p.name} nominal={_fmt(p.nominal)}"
    if isinstance(d, Fixed):
        return f"{head} dist=none"
    if isinstance(d, Gaussian):
        return f"{head} dist=gaussian sigma={_fmt(d.sigma)}"
    if isinstance(d, Uniform):
        return f"{head} dist=uniform lo={_fmt(d.lo)} hi={_fmt(d.hi)}"
    if isinstance(d, Exponential):
        return f"{head} dist=exponential rate={_fmt(d.rate)} offset={_fmt(d.offset)}"
    raise TypeError(f"cannot serialize distribution {d!r}")


def serialize(problem: DesignProblem) -> str:
    """Canonical text of ``problem``; ``parse(serialize(p)) == p``."""
    opts = "".join(f" {k}={_fmt(v)}" for k, v in problem.options.items())
    out = [f"device {problem.device}{opts}"]
    out += [_param_line(p) for p in problem.parameters]
    for fld, target in problem.bindings.items():
        out.append(f"bind {fld} = {target if isinstance(target, str) else _fmt(target)}")
    out += [f"metric {m}" for m in problem.metrics]
    out += [f"spec {s.metric} {s.relation.value} {_fmt(s.bound)}" for s in problem.specs]
    return "\n".join(out) + "\n"


def load(path) -> DesignProblem:
    """Read and parse a UTF-8 design file."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        lineno = data[: exc.start].count(b"\n") + 1
        raise MalformedStatementError(lineno, "file is not valid UTF-8") from None
    return parse(text)
