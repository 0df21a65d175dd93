"""Unit tests for the Markov LDP HTTP API."""

import math
from unittest.mock import patch

import pytest
from fastapi.testclient import TestClient

from markov_ldp.config import settings
from markov_ldp.core.exceptions import ConvergenceError
from markov_ldp.main import app

client = TestClient(app)

TWO_STATE = {"n": 2, "s": 1, "mu": [0.4, 0.2, 0.2, 0.2]}


class TestHealthEndpoints:
    """Test system health monitoring."""

    def test_health_check(self):
        response = client.get("/api/health")
        assert response.status_code == 200
        assert response.json()["status"] == "healthy"
        assert response.json()["version"] == settings.api_version

    def test_openapi_documents_errors(self):
        schema = client.get("/api/openapi.json").json()
        assert "ErrorResponse" in schema["components"]["schemas"]
        assert "413" in schema["paths"]["/api/types/census"]["post"]["responses"]


class TestAnalysisEndpoints:
    """Entropy and rate functions of posted models."""

    def test_entropy(self):
        response = client.post("/api/entropy", json={"n": 2, "s": 1, "mu": [0.25] * 4})
        assert response.status_code == 200
        assert response.json()["process_entropy"] == pytest.approx(math.log(2), abs=1e-15)

    def test_entropy_non_stationary(self):
        response = client.post("/api/entropy", json={"n": 2, "s": 1, "mu": [0.1, 0.4, 0.1, 0.4]})
        assert response.status_code == 400
        data = response.json()
        assert data["error"] == "StationarityError"
        assert data["max_violation"] == pytest.approx(0.3)

    def test_entropy_wrong_length(self):
        response = client.post("/api/entropy", json={"n": 2, "s": 1, "mu": [0.5, 0.5]})
        assert response.status_code == 422

    def test_rate(self):
        response = client.post("/api/rate", json={"model": TWO_STATE, "nu": [0.25, 0.25, 0.25, 0.25]})
        assert response.status_code == 200
        data = response.json()
        assert data["stationary"] is True
        assert data["conditional_relative_entropy"] == pytest.approx(data["row_form"], abs=1e-12)

    def test_rate_off_stationary_set(self):
        response = client.post("/api/rate", json={"model": TWO_STATE, "nu": [0.5, 0.5, 0.0, 0.0]})
        assert response.status_code == 200
        assert response.json()["theta_rate"] == "inf"


class TestContractionEndpoints:
    """Singleton-frequency rate."""

    def test_contract(self):
        response = client.post("/api/contract", json={"model": TWO_STATE, "phi": [0.2, 0.8]})
        assert response.status_code == 200
        data = response.json()
        assert data["value_variational"] == pytest.approx(data["value_constrained"], abs=1e-8)
        assert len(data["nu_star"]) == 4

    def test_contract_needs_positive_model(self):
        model = {"n": 3, "s": 1, "mu": [0.125, 0.125, 0.0, 0.125, 0.25, 0.125, 0.0, 0.125, 0.125]}
        response = client.post("/api/contract", json={"model": model, "phi": [0.5, 0.0, 0.5]})
        assert response.status_code == 400
        assert response.json()["error"] == "HypothesisError"

    def test_contract_bad_phi(self):
        response = client.post("/api/contract", json={"model": TWO_STATE, "phi": [0.2, 0.2]})
        assert response.status_code == 400
        assert response.json()["error"] == "DomainError"

    @patch("markov_ldp.api.contraction.contract")
    def test_contract_solver_failure(self, mock_contract):
        mock_contract.side_effect = ConvergenceError("Newton iteration cap reached", best=[1.0, 2.0], residual=1e-3)
        response = client.post("/api/contract", json={"model": TWO_STATE, "phi": [0.2, 0.8]})
        assert response.status_code == 422
        data = response.json()
        assert data["error"] == "ConvergenceError"
        assert data["residual"] == pytest.approx(1e-3)
        assert "best" not in data


class TestCensusEndpoints:
    """Type-class census and bound verification."""

    def test_census(self):
        response = client.post("/api/types/census", json={"n": 2, "l": 2})
        assert response.status_code == 200
        assert [e["cardinality"] for e in response.json()["entries"]] == [1, 2, 1]

    def test_census_then_verify(self):
        census = client.post("/api/types/census", json={"n": 2, "l": 9}).json()
        response = client.post("/api/types/verify", json=census)
        assert response.status_code == 200
        assert response.json()["status"] == "PASS"

    def test_verify_short_paths(self):
        census = client.post("/api/types/census", json={"n": 3, "l": 2}).json()
        assert client.post("/api/types/verify", json=census).json()["status"] == "UNVERIFIED"

    def test_verify_rejects_bad_counts(self):
        payload = {"n": 2, "l": 2, "s": 1, "entries": [{"counts": [1, 0, 0, 0], "cardinality": 1}]}
        response = client.post("/api/types/verify", json=payload)
        assert response.status_code == 400

    def test_census_over_budget(self):
        response = client.post("/api/types/census", json={"n": 16, "l": 10})
        assert response.status_code == 413
        assert response.json()["error"] == "BudgetExceededError"

    def test_census_validation(self):
        response = client.post("/api/types/census", json={"n": 0, "l": 4})
        assert response.status_code == 422


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
