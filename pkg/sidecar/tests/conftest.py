import pytest
from fastapi.testclient import TestClient

from egorecap_sidecar import build_app, stub_backends


@pytest.fixture()
def backends():
    return stub_backends()


@pytest.fixture()
def client(backends):
    return TestClient(build_app(backends))


def invoke(client, op, role, payload=None):
    response = client.post(
        "/invoke", json={"op": op, "role": role, "payload": payload or {}}
    )
    assert response.status_code == 200, response.text
    return response.json()


def frame_payload(index, rate=1.0, image=None):
    return {"index": index, "rate": rate, "image": image}
