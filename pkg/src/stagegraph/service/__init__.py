"""HTTP facade over the staging pipeline."""

from stagegraph.service.app import create_app

__all__ = ["create_app"]
