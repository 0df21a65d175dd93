"""Build response models from engine results; shared by the CLI and the HTTP API."""

import math
from typing import List, Sequence

from markov_ldp.core.contraction import ContractionReport
from markov_ldp.core.information import (
    conditional_relative_entropy,
    conditional_relative_entropy_rows,
    entropy,
    process_entropy,
    process_entropy_forms,
)
from markov_ldp.core.ldp import RateReport
from markov_ldp.core.markov_core import KTupleDistribution, MarkovModel, check_stationary
from markov_ldp.core.types_method import BoundsReport, TypeCensus
from markov_ldp.schemas.models import (
    BoundsResponse,
    BoundsRow,
    CensusFile,
    ContractionResponse,
    EntropyResponse,
    RateResponse,
    RateRow,
    ext,
)


def census_file(census: TypeCensus) -> CensusFile:
    return CensusFile(n=census.n, l=census.l, s=census.s, entries=census.to_entries())


def census_from_file(data: CensusFile) -> TypeCensus:
    return TypeCensus.from_entries(data.n, data.l, data.s, ((e.counts, e.cardinality) for e in data.entries))


def bounds_response(report: BoundsReport, **extra) -> BoundsResponse:
    """Per-class rows of a bounds report; ``status`` in ``extra`` overrides the report's own."""
    rows = [
        BoundsRow(
            counts=list(row.counts),
            cardinality=row.cardinality,
            conditional_entropy=row.conditional_entropy,
            log_lower=row.log_lower,
            log_cardinality=row.log_cardinality,
            log_upper=row.log_upper,
            perm_log_lower=row.permutation.log_lower,
            perm_log_upper=row.permutation.log_upper,
            passed=row.passed,
        )
        for row in report.rows
    ]
    status = extra.pop("status", report.status)
    return BoundsResponse(
        n=report.n,
        l=report.l,
        s=report.s,
        status=status,
        failures=report.failures,
        mass_conserved=report.mass_conserved,
        rows=rows,
        **extra,
    )


def entropy_response(model: MarkovModel) -> EntropyResponse:
    _, row_form = process_entropy_forms(model)
    return EntropyResponse(
        n=model.n,
        s=model.s,
        entropy_mu=entropy(model.mu),
        entropy_mu_bar=entropy(model.mu_bar),
        process_entropy=process_entropy(model),
        row_form=row_form,
    )


def rate_response(model: MarkovModel, nu_values: Sequence[float]) -> RateResponse:
    """``D_c`` is only defined on the stationary set; off it both rates are ``+inf``."""
    nu = KTupleDistribution(model.n, model.s + 1, nu_values)
    flag = check_stationary(nu)
    rows = conditional_relative_entropy_rows(nu, model.mu)
    value = conditional_relative_entropy(nu, model.mu) if flag.is_stationary else math.inf
    return RateResponse(
        stationary=flag.is_stationary,
        max_violation=flag.max_violation,
        conditional_relative_entropy=ext(value),
        row_form=ext(rows),
        theta_rate=ext(rows if flag.is_stationary else math.inf),
    )


def contraction_response(report: ContractionReport) -> ContractionResponse:
    payload = {key: ext(value) if isinstance(value, float) else value for key, value in report.to_dict().items()}
    return ContractionResponse(**payload)


def rate_rows(report: RateReport) -> List[RateRow]:
    return [
        RateRow(l=row.l, exact=ext(row.exact), rate_proxy=ext(row.rate_proxy), envelope=row.envelope, passed=row.passed)
        for row in report.rows
    ]
