import pathlib
import sys

# the conformance harness drives the planning engine's own fixture
# generators; tests-only dependency, the server package never imports them
_ENGINE_TESTS = pathlib.Path(__file__).resolve().parents[2] / "tests"
if str(_ENGINE_TESTS) not in sys.path:
    sys.path.insert(0, str(_ENGINE_TESTS))
