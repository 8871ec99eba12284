from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rhs_lab.core import ParticleState, VelocityProfile, momentum_from_velocity

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def point_state(pairs, r):
    """State and exact profile through ``(q, u_hat)`` pairs on [0, 1]."""
    Q = np.array([q for q, _ in pairs], dtype=float)
    vel = VelocityProfile.from_interior([u for _, u in pairs], np.concatenate(([0.0], Q, [1.0])))
    P = momentum_from_velocity(ParticleState(Q, np.zeros(Q.size)), vel, r)
    return ParticleState(Q, P), vel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary ----------------------------------------------------------

ACCEPTANCE: dict[int, dict] = {}


def record(number: int, title: str, part: str, ok: bool, detail: str) -> None:
    """Store one measured part of an acceptance criterion and echo it."""
    entry = ACCEPTANCE.setdefault(number, {"title": title, "parts": []})
    entry["parts"].append((part, bool(ok), detail))
    print(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {part}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[number]
        failed = [p for p, ok, _ in entry["parts"] if not ok]
        status = "PASS" if not failed else "FAIL"
        details = "; ".join(f"{p}: {d}" for p, _, d in entry["parts"])
        extra = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"[{status}] criterion {number}: {entry['title']}{extra} | {details}")
