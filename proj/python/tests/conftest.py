import json
import os
import pathlib
import shutil
import subprocess
import time

import pytest
import requests
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMAS = ROOT / "schemas"


def cli_path():
    path = os.environ.get("EMBCMP_CLI") or shutil.which("embcmp")
    if not path:
        candidate = ROOT / "build" / "tools" / "embcmp"
        path = str(candidate) if candidate.exists() else None
    return path


@pytest.fixture(scope="session")
def cli():
    path = cli_path()
    if not path:
        pytest.skip("embcmp executable not built")
    return path


@pytest.fixture(scope="session")
def registry():
    resources = []
    for f in sorted(SCHEMAS.glob("*.schema.json")):
        schema = json.loads(f.read_text())
        Draft202012Validator.check_schema(schema)
        resources.append((schema["$id"], Resource.from_contents(schema)))
    return Registry().with_resources(resources)


@pytest.fixture(scope="session")
def validate(registry):
    def check(name, instance):
        schema = registry.get_or_retrieve(f"{name}.schema.json").value.contents
        Draft202012Validator(schema, registry=registry).validate(instance)
        return instance

    return check


class Service:
    def __init__(self, cli, data_dir, workers=2):
        self.proc = subprocess.Popen(
            [cli, "serve", "--data-dir", str(data_dir), "--port", "0", "--workers", str(workers)],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        first = self.proc.stdout.readline().strip()
        assert first.startswith("port="), first
        self.port = int(first.split("=", 1)[1])
        assert self.proc.stdout.readline().strip() == "ready"
        self.base = f"http://127.0.0.1:{self.port}"

    def get(self, path, **kw):
        return requests.get(self.base + path, timeout=120, **kw)

    def post(self, path, body):
        return requests.post(self.base + path, json=body, timeout=120)

    def wait(self, job_id, timeout=120):
        deadline = time.time() + timeout
        while time.time() < deadline:
            job = self.get(f"/api/jobs/{job_id}").json()
            if job["status"] in ("done", "failed"):
                return job
            time.sleep(0.05)
        raise TimeoutError(job_id)

    def run(self, body):
        r = self.post("/api/jobs", body)
        assert r.status_code in (200, 202), r.text
        job = self.wait(r.json()["job_id"])
        assert job["status"] == "done", job
        return job

    def close(self):
        self.proc.terminate()
        self.proc.wait(timeout=30)


@pytest.fixture
def service(cli, tmp_path):
    s = Service(cli, tmp_path / "data")
    yield s
    s.close()
