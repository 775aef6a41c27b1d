"""Summable services classification and goods code lists.

The services hierarchy is the alternative BOP classification, in which the
credits of the children of every code add up to the credit of the parent.
The *complete set* is the antichain of codes from which every aggregate can
be rebuilt by summation.
"""
import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import CoverageError, LayerError, ParseError, StructureError
from .panel import ExportPanel

TAXONOMY_HEADER = ["code", "parent", "layer", "description", "complete_set"]

#: two-digit HS chapters; chapter 77 is reserved in HS and 99 is dropped
GOODS_CODES = tuple(f"{i:02d}" for i in range(1, 98) if i != 77)

DEFAULT_REL_TOL = 1e-6

# The bundled tree yields 96 goods + 27 services = 123 activities. The
# published description of the universal database quotes 124 sectors; no
# 124th code is invented here.
N_UNIVERSAL_ACTIVITIES = len(GOODS_CODES) + 27


@dataclass(frozen=True)
class TaxonomyNode:
    code: str
    parent: str
    layer: int
    description: str = ""
    complete: bool = False


class TaxonomyTree:
    """Validated rooted tree of service codes.

    Parameters
    ----------
    nodes : iterable of TaxonomyNode
        Exactly one node has an empty ``parent`` (the root, layer 0).
    """

    def __init__(self, nodes):
        self._nodes = {}
        for node in nodes:
            if node.code in self._nodes:
                raise StructureError(f"code {node.code!r} declared more than once "
                                     "(multiple parents are not allowed)")
            self._nodes[node.code] = node
        roots = [n.code for n in self._nodes.values() if not n.parent]
        if len(roots) != 1:
            raise StructureError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        self._children = {code: [] for code in self._nodes}
        for node in self._nodes.values():
            if node.parent:
                if node.parent not in self._nodes:
                    raise StructureError(f"{node.code!r} has unknown parent {node.parent!r}")
                self._children[node.parent].append(node.code)
        self._validate()

    def _validate(self):
        root = self._nodes[self.root]
        if root.layer != 0:
            raise LayerError(f"root {self.root!r} must have layer 0, got {root.layer}")
        seen = {self.root}
        stack = [self.root]
        while stack:
            code = stack.pop()
            for child in self._children[code]:
                if child in seen:
                    raise StructureError(f"cycle through {child!r}")
                seen.add(child)
                expected = self._nodes[code].layer + 1
                if self._nodes[child].layer != expected:
                    raise LayerError(f"{child!r} declares layer {self._nodes[child].layer}"
                                     f" but its parent {code!r} is at layer"
                                     f" {self._nodes[code].layer}")
                stack.append(child)
        if len(seen) != len(self._nodes):
            unreachable = sorted(set(self._nodes) - seen)
            raise StructureError(f"nodes not reachable from the root (cycle): {unreachable}")
        complete = set(self.complete_set)
        if not complete:
            raise CoverageError("the complete set is empty")
        for code in complete:
            clash = complete.intersection(self.ancestors(code))
            if clash:
                raise CoverageError(f"complete-set codes {sorted(clash)} and {code!r}"
                                    " overlap")
        for leaf in self.leaves:
            if leaf not in complete and not complete.intersection(self.ancestors(leaf)):
                raise CoverageError(f"leaf {leaf!r} is not covered by the complete set")

    # -- accessors -----------------------------------------------------------

    def __contains__(self, code):
        return code in self._nodes

    def __len__(self):
        return len(self._nodes)

    def __iter__(self):
        return iter(self._nodes.values())

    def __eq__(self, other):
        if not isinstance(other, TaxonomyTree):
            return NotImplemented
        return self._nodes == other._nodes

    def node(self, code):
        return self._nodes[code]

    @property
    def codes(self):
        return tuple(self._nodes)

    def children(self, code):
        return tuple(self._children[code])

    def parent(self, code):
        return self._nodes[code].parent or None

    def layer(self, code):
        return self._nodes[code].layer

    @property
    def depth(self):
        return max(n.layer for n in self._nodes.values())

    @property
    def leaves(self):
        return tuple(c for c in self._nodes if not self._children[c])

    @property
    def complete_set(self):
        return tuple(n.code for n in self._nodes.values() if n.complete)

    def ancestors(self, code):
        """Proper ancestors of ``code``, nearest first."""
        out = []
        parent = self._nodes[code].parent
        while parent:
            out.append(parent)
            parent = self._nodes[parent].parent
        return out

    def complete_descendants(self, code):
        """Complete-set codes at or below ``code``."""
        complete = set(self.complete_set)
        out, stack = [], [code]
        while stack:
            c = stack.pop()
            if c in complete:
                out.append(c)
            else:
                stack.extend(reversed(self._children[c]))
        return sorted(out, key=self.codes.index)

    @property
    def aggregate_codes(self):
        """Proper ancestors of the complete set, ordered by layer then file order."""
        found = set()
        for code in self.complete_set:
            found.update(self.ancestors(code))
        order = {c: i for i, c in enumerate(self._nodes)}
        return tuple(sorted(found, key=lambda c: (self.layer(c), order[c])))

    def codes_at_layer(self, layer):
        return tuple(c for c, n in self._nodes.items() if n.layer == layer)


def parse_taxonomy(path=None):
    """Read a taxonomy CSV; with no path, the bundled BOP tree is loaded."""
    if path is None:
        with resources.files("universal_efc.data").joinpath("bop_taxonomy.csv").open(
                encoding="utf-8") as fh:
            return _parse(fh, "bop_taxonomy.csv")
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse(fh, Path(path))


def _parse(fh, path):
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != TAXONOMY_HEADER:
        raise ParseError(f"expected header {','.join(TAXONOMY_HEADER)}", 1, path)
    nodes = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ParseError(f"expected 5 fields, got {len(row)}", line, path)
        code, parent, layer, description, flag = (f.strip() for f in row)
        if not code:
            raise ParseError("empty code", line, path)
        try:
            layer = int(layer)
        except ValueError:
            raise ParseError(f"bad layer {layer!r}", line, path) from None
        if flag not in ("0", "1"):
            raise ParseError(f"complete_set must be 0 or 1, got {flag!r}", line, path)
        nodes.append(TaxonomyNode(code, parent, layer, description, flag == "1"))
    return TaxonomyTree(nodes)


def write_taxonomy(tree, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TAXONOMY_HEADER)
        for n in tree:
            writer.writerow([n.code, n.parent, n.layer, n.description, int(n.complete)])


# ---------------------------------------------------------------------------
# Consistency, roll-up and missing statistics
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ["parent", "country", "year", "parent_value", "children_sum",
                  "abs_diff", "rel_diff", "verdict"]


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    """Parent-versus-children comparison, one row per (parent, country, year)."""

    rows: pd.DataFrame
    rel_tol: float

    @property
    def ok(self):
        return bool((self.rows["verdict"] != "FAIL").all())

    @property
    def failures(self):
        return self.rows[self.rows["verdict"] == "FAIL"]

    def counts(self):
        return self.rows["verdict"].value_counts().to_dict()

    def to_csv(self, path):
        self.rows.to_csv(path, index=False, lineterminator="\n")


def check_sum_consistency(tree, panel, rel_tol=DEFAULT_REL_TOL):
    """Compare every parent code with the sum of its children.

    A (parent, country, year) is checked only when the parent and all of its
    children are present; otherwise it is ``SKIPPED``. The relative
    discrepancy is ``|parent - sum| / max(|parent|, |sum|)`` (0 when both
    are zero).
    """
    idx = {a: j for j, a in enumerate(panel.activities)}
    frames = []
    for code in tree.codes:
        kids = tree.children(code)
        if not kids or code not in idx:
            continue
        parent_vals = panel.values[:, idx[code], :]
        if all(k in idx for k in kids):
            child_sum = panel.values[:, [idx[k] for k in kids], :].sum(axis=1)
        else:
            child_sum = np.full(parent_vals.shape, np.nan)
        skipped = np.isnan(parent_vals) | np.isnan(child_sum)
        abs_diff = np.abs(parent_vals - child_sum)
        scale = np.maximum(np.abs(parent_vals), np.abs(child_sum))
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(scale > 0, abs_diff / scale, 0.0)
        verdict = np.where(skipped, "SKIPPED", np.where(rel <= rel_tol, "PASS", "FAIL"))
        ci, yi = np.meshgrid(np.arange(len(panel.countries)), np.arange(len(panel.years)),
                             indexing="ij")
        frames.append(pd.DataFrame({
            "parent": code,
            "country": np.asarray(panel.countries)[ci.ravel()],
            "year": np.asarray(panel.years)[yi.ravel()],
            "parent_value": parent_vals.ravel(),
            "children_sum": child_sum.ravel(),
            "abs_diff": np.where(skipped, np.nan, abs_diff).ravel(),
            "rel_diff": np.where(skipped, np.nan, rel).ravel(),
            "verdict": verdict.ravel(),
        }))
    rows = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(
        columns=REPORT_COLUMNS)
    return ConsistencyReport(rows, rel_tol)


def rollup(tree, panel):
    """Rebuild every aggregate code by summing its complete-set descendants.

    Aggregates already in the panel are overwritten; missing ones are
    appended after the existing activities. An aggregate is missing as soon
    as any of its complete-set descendants is missing.
    """
    absent = [c for c in tree.complete_set if c not in panel.activities]
    if absent:
        raise CoverageError(f"complete-set codes absent from panel: {absent}")
    activities = list(panel.activities)
    for code in tree.aggregate_codes:
        if code not in activities:
            activities.append(code)
    idx = {a: j for j, a in enumerate(activities)}
    values = np.full((len(panel.countries), len(activities), len(panel.years)), np.nan)
    values[:, :len(panel.activities), :] = panel.values
    for code in tree.aggregate_codes:
        cols = [idx[c] for c in tree.complete_descendants(code)]
        values[:, idx[code], :] = values[:, cols, :].sum(axis=1)
    return ExportPanel(panel.countries, activities, panel.years, values)


def missing_share(panel, tree, group_by="year"):
    """Fraction of missing cells per group.

    Parameters
    ----------
    group_by : {"layer", "country", "year"}
        ``layer`` reports every tree layer present in the panel plus a
        ``"complete"`` entry for the complete set. ``country`` and ``year``
        are restricted to the complete-set codes.

    Returns
    -------
    pandas.Series
        Values in [0, 1], indexed by group.
    """
    missing = panel.missing
    idx = {a: j for j, a in enumerate(panel.activities)}
    complete = [idx[c] for c in tree.complete_set if c in idx]
    if group_by == "layer":
        out = {}
        for layer in range(tree.depth + 1):
            cols = [idx[c] for c in tree.codes_at_layer(layer) if c in idx]
            if cols:
                out[layer] = float(missing[:, cols, :].mean())
        if complete:
            out["complete"] = float(missing[:, complete, :].mean())
        return pd.Series(out, name="missing_share", dtype=float)
    sub = missing[:, complete, :]
    if group_by == "country":
        return pd.Series(sub.mean(axis=(1, 2)) if complete else np.nan,
                         index=pd.Index(panel.countries, name="country"),
                         name="missing_share", dtype=float)
    if group_by == "year":
        return pd.Series(sub.mean(axis=(0, 1)) if complete else np.nan,
                         index=pd.Index(panel.years, name="year"),
                         name="missing_share", dtype=float)
    raise ValueError(f"group_by must be 'layer', 'country' or 'year', not {group_by!r}")


def node_kind(code):
    """'good' for HS chapters, 'service' otherwise."""
    return "good" if code.isdigit() else "service"
