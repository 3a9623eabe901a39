"""Evidence gathering for the antipodal question.

Behaviours whose second half of Alice settings mirrors the first half with
outcomes swapped are tested for OUT and LHV membership; a behaviour in the
first polytope but not the second would be a counterexample.  Scenarios are
given by their *base* size: ``Scenario(m_x, m_y)`` here means ``2 m_x``
Alice settings after antipodal extension.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _text
from .behaviour import (Behaviour, Scenario, antipodal_extend, check_antipodal, is_nonsignalling,
                        random_nonsignalling, read_behaviour, write_behaviour)
from .bounds import local_bound, out_bound, symmetrize
from .errors import CapExceededError, LhvOutError
from .polytope import (DEFAULT_CAP, LHV, OUT, _strategy_tables, best_response, membership, mixture_table,
                       read_model, vertex_arrays, vertex_count, write_model)

log = logging.getLogger(__name__)


@dataclass
class ImplicationReport:
    out_member: bool
    lhv_member: bool
    counterexample: bool
    out_result: object = field(default=None, repr=False)
    lhv_result: object = field(default=None, repr=False)
    bundle: Path = None


@dataclass
class SweepSummary:
    tested: int = 0
    out_members: int = 0
    counterexamples: int = 0
    skipped: int = 0
    bundles: list = field(default_factory=list)

    def lines(self):
        return [f"TESTED {self.tested}", f"OUT_MEMBERS {self.out_members}",
                f"COUNTEREXAMPLES {self.counterexamples}", f"SKIPPED {self.skipped}"]


def _doubled(s):
    return Scenario(2 * s.m_x, s.m_y, s.n_a, s.n_b)


def _write_inequality(ineq, bound, value, path):
    m_x, m_y, n_a, n_b = ineq.shape
    lines = ["INEQUALITY 1", f"mx {m_x} my {m_y} na {n_a} nb {n_b}",
             f"BOUND {_text.fmt(bound)}", f"VALUE {_text.fmt(value)}"]
    lines += [" ".join(_text.fmt(v) for v in ineq[x, y].ravel()) for x in range(m_x) for y in range(m_y)]
    _text.write_text(path, lines)


def _read_inequality(path):
    lines = _text.content_lines(path)
    _text.expect_magic(lines, "INEQUALITY 1")
    h = _text.parse_header(lines[1], ("mx", "my", "na", "nb"))
    bound = float(lines[2].split()[1])
    values = np.array(" ".join(lines[4:]).split(), dtype=float)
    return values.reshape(h["mx"], h["my"], h["na"], h["nb"]), bound


def save_bundle(b, out_result, lhv_result, directory):
    """Write a counterexample as files that ``reverify_bundle`` can check from scratch."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_behaviour(b, d / "behaviour.txt")
    write_model(out_result.model, d / "out_model.txt")
    _write_inequality(lhv_result.inequality, lhv_result.polytope_bound,
                      lhv_result.behaviour_value, d / "lhv_inequality.txt")
    return d


def reverify_bundle(directory, tol=1e-9):
    """Recheck a saved counterexample; True when both certificates hold."""
    d = Path(directory)
    b = read_behaviour(d / "behaviour.txt")
    model = read_model(d / "out_model.txt")
    ineq, _ = _read_inequality(d / "lhv_inequality.txt")
    reproduces = np.abs(mixture_table(model) - b.table).max() <= tol
    bound, _, _ = best_response(ineq, LHV)
    violated = float(np.sum(ineq * b.table)) - bound > tol
    return bool(model.kind == OUT and reproduces and violated)


def check_implication(b, tol=1e-9, bundle_dir=None):
    """Run both membership LPs on an antipodal no-signalling behaviour."""
    ok, violation = is_nonsignalling(b, tol)
    if not ok:
        raise LhvOutError(f"behaviour is signalling (violation {violation:.3g})")
    if not check_antipodal(b, tol):
        raise LhvOutError("behaviour is not antipodally symmetric")
    out = membership(b, OUT, tol=tol)
    lhv = membership(b, LHV, tol=tol)
    bad = out.member and not lhv.member
    report = ImplicationReport(out.member, lhv.member, bad, out, lhv)
    if bad:
        log.error("counterexample found (LHV violation %.3g)", lhv.violation)
        if bundle_dir is not None:
            report.bundle = save_bundle(b, out, lhv, bundle_dir)
    return report


def _tally(summary, report):
    summary.tested += 1
    summary.out_members += report.out_member
    summary.counterexamples += report.counterexample
    if report.bundle is not None:
        summary.bundles.append(report.bundle)


def _sweep_range(full, seed, indices, tol, bundle_dir, spread):
    summary = SweepSummary()
    for i in indices:
        b = random_nonsignalling(full, [seed, i], antipodal=True, spread=spread)
        target = None if bundle_dir is None else Path(bundle_dir) / f"sample-{seed}-{i}"
        _tally(summary, check_implication(b, tol, target))
    return summary


def sweep(s, samples, seed=0, tol=1e-9, bundle_dir=None, spread=0.5, workers=1):
    """Test ``samples`` random antipodal behaviours; sample ``i`` uses seed ``(seed, i)``.

    With ``workers > 1`` the indices are split across processes; the summary
    only holds counts, so it does not depend on the split.
    """
    full = _doubled(s)
    count = vertex_count(full, OUT)
    if count > DEFAULT_CAP:
        raise CapExceededError(f"{count} OUT vertices exceed the cap {DEFAULT_CAP}")
    if samples < 0:
        raise LhvOutError("samples must be nonnegative")
    if workers <= 1 or samples < 2:
        return _sweep_range(full, seed, range(samples), tol, bundle_dir, spread)
    parts = [range(k, samples, workers) for k in range(workers)]
    summary = SweepSummary()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_range, full, seed, part, tol, bundle_dir, spread) for part in parts]
        for fut in futures:
            part = fut.result()
            summary.tested += part.tested
            summary.out_members += part.out_members
            summary.counterexamples += part.counterexamples
            summary.bundles += part.bundles
    return summary


def antipodal_symmetrize(b):
    """Average of ``b`` and its image under ``x -> x + m_x`` with Alice's outcome flipped."""
    half = b.scenario.m_x // 2
    t = b.table
    mirror = np.concatenate([t[half:, :, ::-1, :], t[:half, :, ::-1, :]], axis=0)
    return type(b)(b.scenario, 0.5 * (t + mirror), tol=b.tol)


def exhaustive_vertices(s, tol=1e-9, bundle_dir=None):
    """LP-test the antipodal symmetrisation of every OUT vertex of the doubled scenario.

    Symmetrised vertices that still signal cannot satisfy the hypothesis and
    are only counted in ``skipped``.
    """
    full = _doubled(s)
    a, bb = vertex_arrays(full, OUT)
    tables = _strategy_tables(OUT, full, a, bb)
    summary = SweepSummary()
    for i, t in enumerate(tables):
        b = antipodal_symmetrize(Behaviour(full, t))
        if not is_nonsignalling(b, tol)[0]:
            summary.skipped += 1
            continue
        target = None if bundle_dir is None else Path(bundle_dir) / f"vertex-{i}"
        _tally(summary, check_implication(b, tol, target))
    return summary


def dichotomic_uniform_check(M):
    """Whether the symmetrised expression has equal local and OUT bounds."""
    sym = symmetrize(M)
    return out_bound(sym) == local_bound(sym)
