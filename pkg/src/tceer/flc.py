"""Two-input Mamdani fuzzy controllers for the trust-congestion and
energy-distance metrics.

Inference is min activation, max aggregation and centroid defuzzification
on a uniform grid over [0, 1] (trapezoidal rule). Everything is vectorised
over a batch of crisp input pairs so one call scores every forwarding
candidate of a hop.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

DEFAULT_RESOLUTION = 1001

# Inputs clamped into [0, 1], keyed by variable name.
clamp_counts: Counter = Counter()


@dataclass(frozen=True)
class TriangularMF:
    label: str
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a <= self.b <= self.c or self.a == self.c:
            raise ValueError(f"term {self.label}: need a <= b <= c with a < c")
        # vertical edges only at the universe bounds
        if (self.a == self.b and self.a > 0.0) or (self.b == self.c and self.c < 1.0):
            raise ValueError(f"term {self.label}: shoulders are only allowed at 0 and 1")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.b > self.a:
            up = (x - self.a) / (self.b - self.a)
        else:
            up = np.where(x >= self.a, 1.0, 0.0)
        if self.c > self.b:
            down = (self.c - x) / (self.c - self.b)
        else:
            down = np.where(x <= self.c, 1.0, 0.0)
        return np.clip(np.minimum(up, down), 0.0, 1.0)

    @property
    def peak(self) -> float:
        return self.b


@dataclass(frozen=True)
class FuzzyVariable:
    name: str
    terms: tuple[TriangularMF, ...]

    def __post_init__(self):
        labels = [t.label for t in self.terms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"variable {self.name}: duplicate term labels")

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self.terms]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"variable {self.name} has no term {label!r}") from None

    def degrees(self, x) -> np.ndarray:
        """Membership matrix of shape (len(x), n_terms); inputs are clamped."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        outside = int(np.count_nonzero((x < 0.0) | (x > 1.0)))
        if outside:
            clamp_counts[self.name] += outside
            x = np.clip(x, 0.0, 1.0)
        return np.stack([np.interp(x, xp, fp) for xp, fp in self._knots], axis=-1)

    @property
    def _knots(self):
        """Piecewise-linear knots per term, for ``np.interp`` on [0, 1]."""
        cached = self.__dict__.get("_cache")
        if cached is None:
            cached = []
            for t in self.terms:
                xp, fp = [t.b], [1.0]
                if t.b > t.a:
                    xp.insert(0, t.a)
                    fp.insert(0, 0.0)
                if t.c > t.b:
                    xp.append(t.c)
                    fp.append(0.0)
                cached.append((np.array(xp), np.array(fp)))
            object.__setattr__(self, "_cache", tuple(cached))
        return cached


def fuzzify(variable: FuzzyVariable, x: float) -> dict[str, float]:
    deg = variable.degrees([x])[0]
    return dict(zip(variable.labels, (float(d) for d in deg)))


@dataclass(frozen=True)
class RuleBase:
    """Total mapping (input1 label, input2 label) -> output label."""

    table: Mapping[tuple[str, str], str]

    def validate(self, in1: FuzzyVariable, in2: FuzzyVariable, out: FuzzyVariable) -> None:
        for l1 in in1.labels:
            for l2 in in2.labels:
                if (l1, l2) not in self.table:
                    raise ValueError(f"rule base missing ({l1}, {l2})")
        for (l1, l2), o in self.table.items():
            in1.index(l1), in2.index(l2), out.index(o)

    def is_monotone(self, in1: FuzzyVariable, in2: FuzzyVariable, out: FuzzyVariable) -> bool:
        rank = {label: i for i, label in enumerate(out.labels)}
        grid = [[rank[self.table[(a, b)]] for b in in2.labels] for a in in1.labels]
        rows_ok = all(r[k] <= r[k + 1] for r in grid for k in range(len(r) - 1))
        cols_ok = all(grid[k][c] <= grid[k + 1][c]
                      for c in range(len(in2.labels)) for k in range(len(grid) - 1))
        return rows_ok and cols_ok


@dataclass(frozen=True)
class FuzzyController:
    input1: FuzzyVariable
    input2: FuzzyVariable
    output: FuzzyVariable
    rules: RuleBase
    resolution: int = DEFAULT_RESOLUTION
    _grid: np.ndarray = field(init=False, repr=False, compare=False)
    _out_mf: np.ndarray = field(init=False, repr=False, compare=False)
    _rule_idx: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        self.rules.validate(self.input1, self.input2, self.output)
        grid = np.linspace(0.0, 1.0, self.resolution)
        out_mf = np.stack([t(grid) for t in self.output.terms])
        keys = list(self.rules.table)
        i1 = np.array([self.input1.index(a) for a, _ in keys])
        i2 = np.array([self.input2.index(b) for _, b in keys])
        io = np.array([self.output.index(self.rules.table[k]) for k in keys])
        to_term = np.zeros((len(keys), len(self.output.terms)))
        to_term[np.arange(len(keys)), io] = 1.0
        object.__setattr__(self, "_grid", grid)
        object.__setattr__(self, "_out_mf", out_mf)
        object.__setattr__(self, "_rule_idx", (i1, i2, to_term))

    def with_resolution(self, resolution: int) -> "FuzzyController":
        return FuzzyController(self.input1, self.input2, self.output, self.rules, resolution)

    def activations(self, x1, x2) -> np.ndarray:
        """Per-output-term firing strength, shape (batch, n_output_terms)."""
        m1 = self.input1.degrees(x1)
        m2 = self.input2.degrees(x2)
        i1, i2, to_term = self._rule_idx
        fire = np.minimum(m1[:, i1], m2[:, i2])
        # firing strengths are >= 0, so masking by multiplication keeps the max
        return (fire[:, :, None] * to_term[None, :, :]).max(axis=1)

    def infer_batch(self, x1, x2) -> np.ndarray:
        act = self.activations(x1, x2)
        agg = np.minimum(act[:, :, None], self._out_mf[None, :, :]).max(axis=1)
        area = _trapezoid(agg)
        moment = _trapezoid(agg * self._grid)
        safe = np.where(area > 0, area, 1.0)
        return np.where(area > 0, moment / safe, 0.5)

    def infer(self, x1: float, x2: float) -> float:
        return float(self.infer_batch([x1], [x2])[0])


def _trapezoid(y: np.ndarray) -> np.ndarray:
    h = 1.0 / (y.shape[-1] - 1)
    return h * (y.sum(axis=-1) - 0.5 * (y[..., 0] + y[..., -1]))


def three_term_input(name: str) -> FuzzyVariable:
    return FuzzyVariable(name, (
        TriangularMF("Low", 0.0, 0.0, 0.5),
        TriangularMF("Medium", 0.0, 0.5, 1.0),
        TriangularMF("High", 0.5, 1.0, 1.0),
    ))


def five_term_output(name: str) -> FuzzyVariable:
    return FuzzyVariable(name, (
        TriangularMF("VeryLow", 0.0, 0.0, 0.25),
        TriangularMF("Low", 0.0, 0.25, 0.5),
        TriangularMF("Medium", 0.25, 0.5, 0.75),
        TriangularMF("High", 0.5, 0.75, 1.0),
        TriangularMF("VeryHigh", 0.75, 1.0, 1.0),
    ))


_ABBREV = {"L": "Low", "M": "Medium", "H": "High", "VL": "VeryLow", "VH": "VeryHigh"}


def _table(text: str) -> dict[tuple[str, str], str]:
    out = {}
    for item in text.split():
        lhs, rhs = item.split("=")
        a, b = lhs.split(",")
        out[(_ABBREV[a], _ABBREV[b])] = _ABBREV[rhs]
    return out


# trust x CCI. Additive diagonal: the only 3x3 table that keeps the centroid
# output monotone under min/max inference with these partitions. Routed
# candidates always carry trust >= t_th, so the Low-trust row never fires
# in practice; untrusted nodes are excluded by blocking instead.
TCM_RULES = RuleBase(_table("L,L=VL L,M=L L,H=M M,L=L M,M=M M,H=H H,L=M H,M=H H,H=VH"))
# energy x distance: symmetric, either factor partly compensates the other.
EDM_RULES = RuleBase(_table("L,L=VL L,M=L L,H=M M,L=L M,M=M M,H=H H,L=M H,M=H H,H=VH"))


def default_tcm_controller(resolution: int = DEFAULT_RESOLUTION) -> FuzzyController:
    return FuzzyController(three_term_input("trust"), three_term_input("cci"),
                           five_term_output("tcm"), TCM_RULES, resolution)


def default_edm_controller(resolution: int = DEFAULT_RESOLUTION) -> FuzzyController:
    return FuzzyController(three_term_input("energy"), three_term_input("distance"),
                           five_term_output("edm"), EDM_RULES, resolution)


_TCM = default_tcm_controller()
_EDM = default_edm_controller()


def tcm(trust: float, cci: float) -> float:
    return _TCM.infer(trust, cci)


def edm(energy_metric: float, distance_metric: float) -> float:
    return _EDM.infer(energy_metric, distance_metric)


def parse_terms(lines: Sequence[str], name: str) -> FuzzyVariable:
    """Parse ``term NAME a b c`` lines into a variable."""
    terms = []
    for ln in lines:
        parts = ln.split()
        if len(parts) != 5 or parts[0] != "term":
            raise ValueError(f"bad term line {ln!r}; expected 'term NAME a b c'")
        terms.append(TriangularMF(parts[1], *map(float, parts[2:])))
    return FuzzyVariable(name, tuple(terms))


def parse_rules(lines: Sequence[str]) -> RuleBase:
    """Parse ``rule T1 T2 -> OUT`` lines into a rule base."""
    table = {}
    for ln in lines:
        parts = ln.split()
        if len(parts) != 5 or parts[0] != "rule" or parts[3] != "->":
            raise ValueError(f"bad rule line {ln!r}; expected 'rule T1 T2 -> OUT'")
        table[(parts[1], parts[2])] = parts[4]
    return RuleBase(table)


def build_controllers(sections: Mapping[str, Sequence[str]] | None = None,
                      resolution: int = DEFAULT_RESOLUTION) -> tuple[FuzzyController, FuzzyController]:
    """Controllers for (TCM, EDM), applying any ``[flc.*]`` overrides.

    Recognised sections: ``flc.input`` (shared input partition),
    ``flc.output`` (shared output partition), ``flc.tcm`` and ``flc.edm``
    (rule tables). A section that is present replaces the default wholesale.
    """
    sections = dict(sections or {})
    unknown = set(sections) - {"flc.input", "flc.output", "flc.tcm", "flc.edm"}
    if unknown:
        raise ValueError(f"unknown flc section(s): {sorted(unknown)}")

    def inp(name):
        if "flc.input" in sections:
            return parse_terms(sections["flc.input"], name)
        return three_term_input(name)

    def out(name):
        if "flc.output" in sections:
            return parse_terms(sections["flc.output"], name)
        return five_term_output(name)

    tcm_rules = parse_rules(sections["flc.tcm"]) if "flc.tcm" in sections else TCM_RULES
    edm_rules = parse_rules(sections["flc.edm"]) if "flc.edm" in sections else EDM_RULES
    return (FuzzyController(inp("trust"), inp("cci"), out("tcm"), tcm_rules, resolution),
            FuzzyController(inp("energy"), inp("distance"), out("edm"), edm_rules, resolution))
