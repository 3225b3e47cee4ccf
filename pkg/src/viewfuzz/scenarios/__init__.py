"""Built-in scenario files for the scripted app harness."""

from importlib import resources
from pathlib import Path
from typing import List


def scenario_path(name: str) -> Path:
    """Absolute path of a built-in scenario (``name`` without extension)."""
    path = Path(str(resources.files(__name__).joinpath("%s.json" % name)))
    if not path.is_file():
        raise FileNotFoundError("no built-in scenario named %r" % name)
    return path


def list_scenarios() -> List[str]:
    base = Path(str(resources.files(__name__)))
    return sorted(p.stem for p in base.glob("*.json"))
