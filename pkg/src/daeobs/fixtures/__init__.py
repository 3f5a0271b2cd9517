"""Shipped example problems with oracle-generated expected reports.

Every fixture is a problem file under ``data/`` plus, for the positive
cases, a golden report under ``data/golden/`` produced by the command
recorded inside it (see scripts/regenerate_goldens.py).  The test suite
replays each fixture through the CLI and compares against the golden;
golden values must never be edited by hand, only regenerated.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class ExampleFixture:
    """One shipped problem with its expectations.

    ``command`` is the CLI subcommand the fixture exercises;
    ``expected_exit`` the exit code it must produce; ``golden`` the name of
    the committed expected report (None for negative fixtures); ``note``
    records how the expectations were derived and which oracle vouches for
    them.
    """

    name: str
    command: str
    problem: str
    expected_exit: int
    golden: str | None
    note: str


def data_path(filename: str) -> Path:
    """Absolute path of a shipped fixture file."""
    return Path(resources.files(__package__) / "data" / filename)


def fixture_suite() -> list[ExampleFixture]:
    return [
        ExampleFixture(
            name="est_classical",
            command="synthesize-observer",
            problem="est_classical.json",
            expected_exit=0,
            golden="est_classical.report.json",
            note=("derived: invertible-F case; observer matrices and sigma "
                  "cross-checked against an independently coded textbook "
                  "filter solve (tests/oracles.py::classical_filter)"),
        ),
        ExampleFixture(
            name="est_rank1",
            command="synthesize-observer",
            problem="est_rank1.json",
            expected_exit=0,
            golden="est_rank1.report.json",
            note=("derived: rank-1 F with one-dimensional adjoint "
                  "consistency space; golden regenerated by the recorded "
                  "command, sigma validated by the noisy-run error bound in "
                  "the acceptance suite"),
        ),
        ExampleFixture(
            name="est_undetectable",
            command="synthesize-observer",
            problem="est_undetectable.json",
            expected_exit=2,
            golden=None,
            note=("trivial: unstable scalar state with zero output map has "
                  "a non-stabilizable adjoint reduction; no observer exists"),
        ),
        ExampleFixture(
            name="ctrl_ode",
            command="solve-lq",
            problem="ctrl_ode.json",
            expected_exit=0,
            golden="ctrl_ode.report.json",
            note=("derived: E = I double integrator; P matches the "
                  "closed-form LQR solution [[sqrt(3),1],[1,sqrt(3)]] and "
                  "the finite-horizon transcription oracle"),
        ),
        ExampleFixture(
            name="ctrl_algebraic",
            command="solve-lq",
            problem="ctrl_algebraic.json",
            expected_exit=0,
            golden="ctrl_algebraic.report.json",
            note=("trivial: E = 0 purely algebraic system; the reduced "
                  "state is empty and the controller blocks are degenerate"),
        ),
        ExampleFixture(
            name="ctrl_rank1",
            command="solve-lq",
            problem="ctrl_rank1.json",
            expected_exit=0,
            golden="ctrl_rank1.report.json",
            note=("derived: dx1/dt = -x1, 0 = x2 + u; hand solution gives "
                  "P = [[1/2]], K = 0, A_c = [[-1]] (asserted in "
                  "tests/test_riccati.py)"),
        ),
        ExampleFixture(
            name="equiv_rank1",
            command="check-equivalence",
            problem="ctrl_rank1.json",
            expected_exit=0,
            golden="equiv_rank1.report.json",
            note=("derived: randomized build pairs of the rank-1 system; "
                  "defect bounds certified by tests/test_equivalence.py"),
        ),
    ]
