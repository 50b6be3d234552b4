import subprocess
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent

sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO_ROOT


@pytest.fixture(scope="session")
def specs_dir(repo_root: Path) -> Path:
    return repo_root / "specs"


@pytest.fixture(scope="session")
def corpus_dir(repo_root: Path) -> Path:
    return repo_root / "corpus"


# Verdict lines collected by the acceptance tests, echoed after the
# test summary so they survive output capturing.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)


def run_wac(*args: str, cwd: Path = REPO_ROOT, env: dict | None = None):
    """Run the CLI in a subprocess; returns CompletedProcess."""
    import os

    full_env = dict(os.environ)
    full_env.pop("WAC_SPEC_DIR", None)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "wac", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        env=full_env,
    )
