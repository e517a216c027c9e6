from .app import create_app
from .models import CheckRequest, ReportResponse, RunRequest

__all__ = ["create_app", "CheckRequest", "ReportResponse", "RunRequest"]
