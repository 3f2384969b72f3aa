"""Machine-readable reports written by the CLI.

Each report is a pydantic model serialized with ``model_dump_json``; the schemas under
``schemas/`` describe the same shapes for consumers outside Python.
"""

from typing import Literal

from pydantic import BaseModel, Field

Outcome = Literal['normal', 'exception', 'resource-limit', 'error']


class ViolationEntry(BaseModel):
    rule: str
    message: str
    line: int | None = None
    column: int | None = None


class CheckReport(BaseModel):
    path: str
    ok: bool
    violations: list[ViolationEntry] = Field(default_factory=list)


class RunReport(BaseModel):
    """One method call: how it ended, its rendered result, what it printed and the heap it left."""

    call: str
    outcome: Outcome
    value: str
    printed: list[str] = Field(default_factory=list)
    heap: list[dict] = Field(default_factory=list)
    steps: int = 0
    trace: list[dict] | None = None

    def observable(self):
        return self.outcome, self.value, tuple(self.printed), self.heap


class DiffRow(BaseModel):
    sequence: int
    position: int
    input: str
    source: RunReport
    target: RunReport
    verdict: Literal['agree', 'disagree']
    fields: list[str] = Field(default_factory=list)


class DiffReport(BaseModel):
    flatten: bool
    mutated: bool = False
    rows: list[DiffRow] = Field(default_factory=list)

    @property
    def agree(self):
        return all(row.verdict == 'agree' for row in self.rows)


class CfgSummary(BaseModel):
    nodes: list[str]
    edges: list[tuple[str, str, str]]
    simple_cycles: int


class AnalysisReport(BaseModel):
    k: int
    entry: str
    variables: dict[str, list[str]]
    contexts: dict[str, dict[str, list[str]]] | None = None
    cfg: CfgSummary


class GraphCounts(BaseModel):
    nodes: int
    edges: int
    simple_cycles: int


class SubgraphCheck(BaseModel):
    verdict: Literal['yes', 'no', 'budget-exceeded']
    explored: int
    budget: int


class PotencyReport(BaseModel):
    method: str
    source: GraphCounts
    reconstructed: dict[str, GraphCounts]
    ambiguous_variables: dict[str, int]
    subgraph: SubgraphCheck


def compare_runs(source, target):
    """Names of the observable fields on which two reports differ."""
    return [
        name
        for name in ('outcome', 'value', 'printed', 'heap')
        if getattr(source, name) != getattr(target, name)
    ]
