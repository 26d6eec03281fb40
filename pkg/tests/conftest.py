import shutil
import os
import pytest

from reflectmc.verify.sampling import clear_cache


@pytest.fixture
def datadir(tmpdir, request):
    """
    Copies the folder named after the test module, if present, into a temporary
    directory, so that tests can write outputs next to their inputs.
    """
    filename = request.module.__file__
    test_dir, _ = os.path.splitext(filename)
    if os.path.isdir(test_dir):
        shutil.copytree(test_dir, str(tmpdir), dirs_exist_ok=True)
    print(f"{tmpdir=}")
    return tmpdir


@pytest.fixture(autouse=True)
def fresh_samples():
    clear_cache()
    yield
    clear_cache()
