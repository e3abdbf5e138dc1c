import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from offside.cli import main  # noqa: E402
from scenes import broadcast_dict  # noqa: E402

# acceptance outcomes, filled in by test_acceptance.py and printed at the end of the run
ACCEPTANCE: dict = {}


def record(key: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[key] = (passed, detail)
    print(f"{key}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:].split()[0])):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key}: {'PASS' if passed else 'FAIL'} {detail}")


@pytest.fixture(scope="session")
def cli_run(tmp_path_factory):
    """One synthesised 30-frame pan sequence pushed through the CLI with the default config."""
    root = tmp_path_factory.mktemp("e2e")
    scene = root / "scene.json"
    scene.write_text(json.dumps(broadcast_dict()))
    frames = root / "frames"
    assert main(["synth", "--scene", str(scene), "--out", str(frames)]) == 0
    config = root / "config.json"
    from offside.config import default_config_dict

    config.write_text(json.dumps(default_config_dict()))
    out = root / "out"
    code = main(["process", "--frames", str(frames), "--config", str(config), "--out", str(out)])
    return {"root": root, "frames": frames, "config": config, "out": out, "code": code}
