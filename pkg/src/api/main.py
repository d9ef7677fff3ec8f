"""FastAPI backend for lattice-kinetics"""

import logging
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .. import __version__
from ..core.reports import diff_frames
from ..core.settings import LabSettings, load_settings
from ..estimators.covariance import REPORT_COLUMNS
from ..lattice.conditions import validate_conditions
from ..lattice.dispersion import build_dispersion_table
from ..parsers.model_parser import force_field_from_dict, profile_from_dict
from ..sampling.profile_validation import validate_profile

logger = logging.getLogger(__name__)

app = FastAPI(
    title="lattice-kinetics API",
    description="Model and profile validation and report comparison",
    version=__version__,
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Settings loaded on startup
settings: Optional[LabSettings] = None


@app.on_event("startup")
async def startup_event():
    """Load config.yaml on startup"""
    global settings
    settings = load_settings()


def _settings() -> LabSettings:
    return settings or LabSettings()


def _json_float(value: float) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


def _json_safe(data: Any) -> Any:
    """Plain JSON types with non-finite floats as null"""
    if isinstance(data, dict):
        return {str(k): _json_safe(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_json_safe(v) for v in data]
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        return _json_float(data)
    return data


class ModelRequest(BaseModel):
    """Force field document, nearest-neighbour or explicit"""
    model: Dict[str, Any]


class ProfileRequest(BaseModel):
    """Profile document with the model supplying its dual grid"""
    model: Dict[str, Any]
    profile: Dict[str, Any]
    positions: List[List[float]] = Field(default_factory=list)


class DiffRequest(BaseModel):
    """Report rows with columns quantity, index, row, col, real, imag, stderr"""
    empirical: List[Dict[str, Any]]
    theory: List[Dict[str, Any]]
    sigma: Optional[float] = None


class ValidationResponse(BaseModel):
    """Response model"""
    success: bool
    result: Optional[dict] = None
    error: Optional[str] = None


@app.get("/")
async def root():
    """Health check"""
    return {"status": "ok", "service": "lattice-kinetics API"}


@app.post("/validate-model", response_model=ValidationResponse)
async def validate_model_endpoint(request: ModelRequest):
    """
    Check a force field against E1-E6

    Args:
        request: ModelRequest with the model document

    Returns:
        ValidationResponse with the condition report
    """
    try:
        field = force_field_from_dict(request.model)
        section = _settings().lattice
        table = build_dispersion_table(field, singular_tol=section.singular_tol, e3_floor=section.e3_floor,
                                       degeneracy_rel_tol=section.degeneracy_rel_tol)
        report = validate_conditions(field, table, _settings().condition_tolerances())
        return ValidationResponse(success=True, result=_json_safe(report.to_dict()))
    except Exception as e:
        logger.warning("validate-model failed: %s", e)
        return ValidationResponse(success=False, error=str(e))


@app.post("/validate-profile", response_model=ValidationResponse)
async def validate_profile_endpoint(request: ProfileRequest):
    """Check a slow profile at the requested positions (default: the origin)"""
    try:
        field = force_field_from_dict(request.model)
        profile = profile_from_dict(request.profile)
        table = build_dispersion_table(field, singular_tol=_settings().lattice.singular_tol)
        positions = request.positions or [[0.0] * field.lattice.d]
        report = validate_profile(profile, positions, table)
        return ValidationResponse(success=True, result=_json_safe(report.to_dict()))
    except Exception as e:
        logger.warning("validate-profile failed: %s", e)
        return ValidationResponse(success=False, error=str(e))


@app.post("/diff", response_model=ValidationResponse)
async def diff_endpoint(request: DiffRequest):
    """Per-entry z-scores of an empirical report against a theory report"""
    try:
        empirical = pd.DataFrame(request.empirical, columns=REPORT_COLUMNS)
        theory = pd.DataFrame(request.theory, columns=REPORT_COLUMNS)
        sigma = request.sigma if request.sigma is not None else _settings().statistics.sigma
        result = diff_frames(empirical, theory, sigma)
        summary = result.summary()
        summary["max_z"] = _json_float(summary["max_z"])
        failures = [
            {"quantity": row.quantity, "index": row.index, "row": int(row.row), "col": int(row.col),
             "z": _json_float(row.z)}
            for row in result.failures().itertuples(index=False)
        ]
        return ValidationResponse(success=True, result={**summary, "failures": failures})
    except Exception as e:
        return ValidationResponse(success=False, error=str(e))


@app.get("/health")
async def health():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "settings_loaded": settings is not None,
    }


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
