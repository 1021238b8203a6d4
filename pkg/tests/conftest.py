"""Shared fixtures: an in-process service client and small input helpers."""

from __future__ import annotations

import warnings

import numpy as np
import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from matrixrepet import Matrix
from matrixrepet.service import app


@pytest.fixture(scope="session")
def client() -> TestClient:
    return TestClient(app)


@pytest.fixture
def uniform_matrix():
    def make(n: int, symbol: str = "a") -> Matrix:
        return Matrix(np.full((n, n), ord(symbol), dtype=np.int64))

    return make


def matrix_payload(m: Matrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "cells": m.data.ravel().tolist()}
