from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
from pandas import DataFrame

from wfsosWB.ultras import Ultras

MISMATCH_COLUMNS = ["state", "label", "kind", "left", "right"]


def _show(fns: Any) -> str:
    return "[" + ", ".join(repr(fn) for fn in sorted(fns, key=lambda f: f.sort_key())) + "]"


def compare_systems(left: Ultras, right: Ultras) -> DataFrame:
    """Return every difference between two systems over the same states, one row
    per (state, label) whose sets of weight functions differ, plus rows for states
    or labels only one side has. An empty frame means the systems are equal."""
    rows: List[Tuple[Any, ...]] = []
    if left.monoid != right.monoid:
        rows.append(("", "", "monoid", left.monoid.id, right.monoid.id))
    lstates, rstates = set(left.states), set(right.states)
    for x in sorted(lstates - rstates, key=str):
        rows.append((str(x), "", "state", "present", "absent"))
    for x in sorted(rstates - lstates, key=str):
        rows.append((str(x), "", "state", "absent", "present"))
    for a in sorted(set(left.labels) ^ set(right.labels)):
        side = ("present", "absent") if a in left.labels else ("absent", "present")
        rows.append(("", a, "label", *side))
    labels = sorted(set(left.labels) & set(right.labels))
    for x in left.states:
        if x not in rstates:
            continue
        for a in labels:
            fl, fr = left.trans(x, a), right.trans(x, a)
            if fl != fr:
                rows.append((str(x), a, "trans", _show(fl), _show(fr)))
    return pd.DataFrame(rows, columns=MISMATCH_COLUMNS)


class Compare:
    """A helper class for comparing several derived systems, e.g. the same model run
    through different specifications."""

    def __init__(
        self,
        systems: List[Ultras],
        labels: List[str],
        base_system: Optional[Ultras] = None,
        base_label: Optional[str] = None,
    ):
        """Construct a Compare object.

        Parameters
        ----------
        systems: List[Ultras]
            The systems to compare.

        labels: List[str]
            A name for each system. Must be the same length as `systems`.

        base_system: Ultras
            If given, each system is compared only to this one.

        base_label: str
            The name of `base_system`.
        """
        if len(systems) != len(labels):
            raise ValueError("`systems` and `labels` must have the same length.")
        self.systems = list(systems)
        self.labels = labels.copy()
        self.base_system = base_system
        self.base_label = base_label or "base"
        self.dict: Dict[str, Ultras] = dict(zip(self.labels, self.systems))

    def equal(self) -> DataFrame:
        """Return the grid of exact equality across systems."""
        if self.base_system is not None:
            data = [[s == self.base_system] for s in self.systems]
            return pd.DataFrame(data=data, index=self.labels, columns=[self.base_label])
        data = [[s == t for t in self.systems] for s in self.systems]
        return pd.DataFrame(data=data, index=self.labels, columns=self.labels)

    def mismatches(self) -> DataFrame:
        """Return the differences of every system from the base (or from the first
        system), with a `system` column naming the compared system."""
        if self.base_system is not None:
            base, others = self.base_system, list(zip(self.labels, self.systems))
        else:
            base, others = self.systems[0], list(zip(self.labels[1:], self.systems[1:]))
        frames = []
        for name, sys in others:
            diff = compare_systems(base, sys)
            diff.insert(0, "system", name)
            frames.append(diff)
        if not frames:
            return pd.DataFrame(columns=["system", *MISMATCH_COLUMNS])
        return pd.concat(frames, ignore_index=True)

    def state_counts(self) -> DataFrame:
        data = [[len(s), sum(len(fns) for _, _, fns in s.transitions())] for s in self.systems]
        return pd.DataFrame(data=data, index=self.labels, columns=["states", "weight_fns"])

